//! Whole-dataset enhancement.
//!
//! Records are pulled from a [`RecordStream`] in fixed-size chunks, each
//! chunk is enhanced image-by-image on an [`Executor`], and the results are
//! written back in input order. Only one chunk is ever held in memory.
//!
//! With the `parallel` feature (on by default) an executor with more than
//! one worker runs on a dedicated rayon pool; without it every executor is
//! sequential. Each image is processed independently, so output bytes never
//! depend on the worker count.

use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::dataset::{
    Codec, DatasetManifest, DatasetSink, EnhancementRecord, LabeledImage, ProvenanceManifest,
    RecordStream,
};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::mm::{enhance_mm, MmConfig};
use crate::naive::{enhance_naive, NaiveConfig};

/// Enhancement applied to every image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "method", content = "params")]
pub enum Method {
    /// Pass-through; useful for format conversion and round-trip checks.
    Identity,
    Naive(NaiveConfig),
    Mm(MmConfig),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Identity => "identity",
            Method::Naive(_) => "naive",
            Method::Mm(_) => "mm",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Method::Identity => Ok(()),
            Method::Naive(cfg) => cfg.validate(),
            Method::Mm(cfg) => cfg.validate(),
        }
    }

    pub fn apply(&self, img: &Image) -> Result<Image> {
        match self {
            Method::Identity => Ok(img.clone()),
            Method::Naive(cfg) => enhance_naive(img, cfg),
            Method::Mm(cfg) => enhance_mm(img, cfg),
        }
    }

    pub fn record(&self) -> EnhancementRecord {
        let params = match self {
            Method::Identity => serde_json::Value::Object(Default::default()),
            Method::Naive(cfg) => serde_json::to_value(cfg).expect("config serializes"),
            Method::Mm(cfg) => serde_json::to_value(cfg).expect("config serializes"),
        };
        EnhancementRecord {
            method: self.name().to_string(),
            params,
        }
    }
}

/// Runs independent jobs either inline or on a private thread pool.
pub struct Executor {
    workers: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    pub fn sequential() -> Self {
        Executor {
            workers: 1,
            #[cfg(feature = "parallel")]
            pool: None,
        }
    }

    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::param("worker count must be at least 1"));
        }
        if workers == 1 {
            return Ok(Self::sequential());
        }
        #[cfg(feature = "parallel")]
        {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .thread_name(|i| format!("wavedge-{i}"))
                .build()
                .map_err(|e| Error::param(format!("cannot start {workers} workers: {e}")))?;
            Ok(Executor {
                workers,
                pool: Some(pool),
            })
        }
        #[cfg(not(feature = "parallel"))]
        Ok(Executor { workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn is_parallel(&self) -> bool {
        #[cfg(feature = "parallel")]
        {
            self.pool.is_some()
        }
        #[cfg(not(feature = "parallel"))]
        false
    }

    /// Maps `f` over `items`, returning results in input order.
    pub fn map<T, U, F>(&self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| items.par_iter().map(&f).collect());
        }
        items.iter().map(f).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchOptions {
    pub workers: usize,
    /// Records held in memory at once. Zero picks `32 * workers`.
    pub chunk_size: usize,
    pub codec: Codec,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions {
            workers: 1,
            chunk_size: 0,
            codec: Codec::Same,
        }
    }
}

impl BatchOptions {
    fn effective_chunk(&self) -> usize {
        if self.chunk_size == 0 {
            32 * self.workers.max(1)
        } else {
            self.chunk_size
        }
    }
}

/// Wall time spent per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimes {
    pub read: Duration,
    pub enhance: Duration,
    pub write: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub items: usize,
    pub workers: usize,
    pub chunk_size: usize,
    /// Largest number of records held at once.
    pub max_in_flight: usize,
    pub elapsed: Duration,
    pub items_per_sec: f64,
    pub stages: StageTimes,
}

/// Reported after each chunk is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkEvent {
    pub first_index: usize,
    pub len: usize,
}

fn at_record(index: usize, err: Error) -> Error {
    match err {
        Error::Io { path, source } => Error::Io { path, source },
        Error::Param(m) => Error::Param(format!("record {index}: {m}")),
        Error::Format(m) => Error::Format(format!("record {index}: {m}")),
        Error::Shape(m) => Error::Shape(format!("record {index}: {m}")),
    }
}

/// Enhances every record of `stream` with `method` and writes the result to
/// `out_root`, preserving order. `on_chunk` observes progress.
pub fn run_batch(
    manifest: &DatasetManifest,
    stream: RecordStream,
    method: &Method,
    out_root: &Path,
    opts: &BatchOptions,
    mut on_chunk: impl FnMut(ChunkEvent),
) -> Result<(ProvenanceManifest, BatchSummary)> {
    method.validate()?;
    let executor = Executor::new(opts.workers)?;
    let chunk = opts.effective_chunk();
    let start = Instant::now();
    let mut stages = StageTimes::default();
    let mut sink = DatasetSink::create(out_root, manifest, opts.codec)?;
    let mut stream = stream.enumerate();
    let mut max_in_flight = 0;
    let mut buffer: Vec<LabeledImage> = Vec::with_capacity(chunk);

    loop {
        let t = Instant::now();
        buffer.clear();
        let first_index = sink.written();
        for (i, record) in stream.by_ref().take(chunk) {
            buffer.push(record.map_err(|e| at_record(i, e))?);
        }
        stages.read += t.elapsed();
        if buffer.is_empty() {
            break;
        }
        max_in_flight = max_in_flight.max(buffer.len());

        let t = Instant::now();
        let enhanced = executor.map(&buffer, |r| method.apply(&r.image));
        stages.enhance += t.elapsed();

        let t = Instant::now();
        for (offset, (result, src)) in enhanced.into_iter().zip(&buffer).enumerate() {
            let image = result.map_err(|e| at_record(first_index + offset, e))?;
            sink.push(&LabeledImage {
                image,
                label: src.label,
            })
            .map_err(|e| at_record(first_index + offset, e))?;
        }
        stages.write += t.elapsed();
        on_chunk(ChunkEvent {
            first_index,
            len: buffer.len(),
        });
    }

    let t = Instant::now();
    let provenance = sink.finish(method.record())?;
    stages.write += t.elapsed();
    let elapsed = start.elapsed();
    let summary = BatchSummary {
        items: provenance.count,
        workers: executor.workers(),
        chunk_size: chunk,
        max_in_flight,
        elapsed,
        items_per_sec: provenance.count as f64 / elapsed.as_secs_f64().max(1e-9),
        stages,
    };
    Ok((provenance, summary))
}
