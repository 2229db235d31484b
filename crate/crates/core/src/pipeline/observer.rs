//! Instrumentation hooks for the cascade.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::neuralnet::{EncoderLevel, MAX_LEVEL};
use crate::tensor::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Content,
    Style,
}

/// What one encoder-transform-decoder pass produced.
#[derive(Debug)]
pub struct StageReport<'a> {
    pub level: EncoderLevel,
    pub output: &'a Image,
    /// Relative Frobenius error of the colored covariance against the style covariance,
    /// present only for WCT stages with statistic checks enabled.
    pub covariance_error: Option<f64>,
}

/// Receives callbacks from a running stylization. All methods default to no-ops.
pub trait Observer: Sync {
    fn encoded(&self, _role: Role, _level: EncoderLevel) {}
    fn decoded(&self, _level: EncoderLevel) {}
    fn stage_finished(&self, _stage: &StageReport<'_>) {}
    fn smoothed(&self) {}
}

#[derive(Debug, Default, Clone, Copy)]
pub struct NoopObserver;

impl Observer for NoopObserver {}

/// Thread-safe pass counters per encoder level.
#[derive(Debug, Default)]
pub struct PassCounters {
    content_encodes: [AtomicUsize; MAX_LEVEL],
    style_encodes: [AtomicUsize; MAX_LEVEL],
    decodes: [AtomicUsize; MAX_LEVEL],
    smoothing: AtomicUsize,
}

impl PassCounters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn content_encodes(&self, level: EncoderLevel) -> usize {
        self.content_encodes[level.get() - 1].load(Ordering::Relaxed)
    }

    pub fn style_encodes(&self, level: EncoderLevel) -> usize {
        self.style_encodes[level.get() - 1].load(Ordering::Relaxed)
    }

    pub fn decodes(&self, level: EncoderLevel) -> usize {
        self.decodes[level.get() - 1].load(Ordering::Relaxed)
    }

    pub fn total_decodes(&self) -> usize {
        self.decodes.iter().map(|c| c.load(Ordering::Relaxed)).sum()
    }

    pub fn total_content_encodes(&self) -> usize {
        self.content_encodes.iter().map(|c| c.load(Ordering::Relaxed)).sum()
    }

    pub fn smoothing_passes(&self) -> usize {
        self.smoothing.load(Ordering::Relaxed)
    }

    /// Levels whose encoder ran at least once, shallowest first.
    pub fn levels_touched(&self) -> Vec<usize> {
        EncoderLevel::all()
            .filter(|&l| self.content_encodes(l) + self.style_encodes(l) > 0)
            .map(EncoderLevel::get)
            .collect()
    }
}

impl Observer for PassCounters {
    fn encoded(&self, role: Role, level: EncoderLevel) {
        let slot = match role {
            Role::Content => &self.content_encodes,
            Role::Style => &self.style_encodes,
        };
        slot[level.get() - 1].fetch_add(1, Ordering::Relaxed);
    }

    fn decoded(&self, level: EncoderLevel) {
        self.decodes[level.get() - 1].fetch_add(1, Ordering::Relaxed);
    }

    fn smoothed(&self) {
        self.smoothing.fetch_add(1, Ordering::Relaxed);
    }
}
