use ctmc_mlmc::mlmc::{run_chunk, Executor, LevelAccumulator, SampleFn, CHUNK_SIZE};
use rayon::prelude::*;

/// Runs chunks of [`CHUNK_SIZE`] paths on a rayon pool and merges them in
/// chunk order, so the result matches [`ctmc_mlmc::mlmc::Sequential`] bit
/// for bit.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    pub fn new(workers: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .thread_name(|i| format!("mlmc-worker-{i}"))
            .build()?;
        Ok(RayonExecutor { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for RayonExecutor {
    fn run(
        &self,
        first: u64,
        count: u64,
        job: &SampleFn<'_>,
    ) -> ctmc_mlmc::Result<LevelAccumulator> {
        let end = first + count;
        let chunks: Vec<(u64, u64)> = (first..end)
            .step_by(CHUNK_SIZE as usize)
            .map(|s| (s, CHUNK_SIZE.min(end - s)))
            .collect();
        let parts: Vec<ctmc_mlmc::Result<LevelAccumulator>> = self.pool.install(|| {
            chunks
                .par_iter()
                .map(|&(s, n)| run_chunk(s, n, job))
                .collect()
        });
        let mut acc = LevelAccumulator::default();
        for part in parts {
            acc = acc.merge(&part?);
        }
        Ok(acc)
    }
}
