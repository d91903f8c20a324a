use crate::error::Result;
use crate::mlmc::stats::{LevelAccumulator, Sample};

/// Paths per accumulation chunk. Every executor must reduce over exactly
/// these chunks, merged in ascending order, so that results do not depend on
/// how many workers ran them.
pub const CHUNK_SIZE: u64 = 64;

/// Draws the sample with the given path index.
pub type SampleFn<'a> = dyn Fn(u64) -> Result<Sample> + Sync + 'a;

/// Runs a contiguous range of path indices and reduces them.
pub trait Executor {
    fn run(&self, first: u64, count: u64, job: &SampleFn<'_>) -> Result<LevelAccumulator>;
}

/// Accumulates paths `first .. first + count` in order. Executors call this
/// once per chunk of [`CHUNK_SIZE`] paths.
pub fn run_chunk(first: u64, count: u64, job: &SampleFn<'_>) -> Result<LevelAccumulator> {
    let mut acc = LevelAccumulator::default();
    for i in first..first + count {
        acc.push(&job(i)?);
    }
    Ok(acc)
}

/// Runs every chunk on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn run(&self, first: u64, count: u64, job: &SampleFn<'_>) -> Result<LevelAccumulator> {
        let mut acc = LevelAccumulator::default();
        let mut start = first;
        let end = first + count;
        while start < end {
            let len = CHUNK_SIZE.min(end - start);
            acc = acc.merge(&run_chunk(start, len, job)?);
            start += len;
        }
        Ok(acc)
    }
}
