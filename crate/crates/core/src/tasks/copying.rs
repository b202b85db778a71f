use rand::Rng;

use crate::error::{Error, Result};

/// Copying-memory task: remember `K` symbols over a gap of `L` blanks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CopyConfig {
    /// Alphabet size `N`.
    pub alphabet: usize,
    /// Number of symbols to copy, `K`.
    pub copy_len: usize,
    /// Spacing `L`.
    pub spacing: usize,
    pub batch: usize,
}

impl Default for CopyConfig {
    fn default() -> Self {
        Self {
            alphabet: 8,
            copy_len: 10,
            spacing: 100,
            batch: 128,
        }
    }
}

impl CopyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alphabet < 2 || self.copy_len == 0 || self.spacing == 0 || self.batch == 0 {
            return Err(Error::Config(format!(
                "copying needs N >= 2, K >= 1, L >= 1, batch >= 1; got N={} K={} L={} batch={}",
                self.alphabet, self.copy_len, self.spacing, self.batch
            )));
        }
        Ok(())
    }

    /// `L + 2K`.
    pub fn seq_len(&self) -> usize {
        self.spacing + 2 * self.copy_len
    }

    pub fn blank(&self) -> usize {
        self.alphabet
    }

    pub fn start(&self) -> usize {
        self.alphabet + 1
    }

    /// Symbols, blank and start marker.
    pub fn vocab(&self) -> usize {
        self.alphabet + 2
    }

    /// Positions whose target is a remembered symbol.
    pub fn recall_range(&self) -> std::ops::Range<usize> {
        self.spacing + self.copy_len..self.seq_len()
    }
}

/// Input and target token sequences, `[batch][time]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopyBatch {
    pub inputs: Vec<Vec<usize>>,
    pub targets: Vec<Vec<usize>>,
}

impl CopyBatch {
    /// Targets regrouped by timestep, `[time][batch]`.
    pub fn targets_by_step(&self) -> Vec<Vec<usize>> {
        let len = self.targets.first().map_or(0, Vec::len);
        (0..len)
            .map(|t| self.targets.iter().map(|s| s[t]).collect())
            .collect()
    }
}

/// Builds one (input, target) pair around the given symbols.
pub fn copying_pair(cfg: &CopyConfig, symbols: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    cfg.validate()?;
    if symbols.len() != cfg.copy_len {
        return Err(Error::InvalidArgument(format!(
            "expected {} symbols, got {}",
            cfg.copy_len,
            symbols.len()
        )));
    }
    if let Some(&s) = symbols.iter().find(|&&s| s >= cfg.alphabet) {
        return Err(Error::InvalidArgument(format!(
            "symbol {s} outside alphabet of {}",
            cfg.alphabet
        )));
    }
    let (k, l) = (cfg.copy_len, cfg.spacing);
    let mut input = Vec::with_capacity(cfg.seq_len());
    input.extend_from_slice(symbols);
    input.extend(std::iter::repeat_n(cfg.blank(), l));
    input.push(cfg.start());
    input.extend(std::iter::repeat_n(cfg.blank(), k - 1));
    let mut target = vec![cfg.blank(); k + l];
    target.extend_from_slice(symbols);
    Ok((input, target))
}

/// Draws `batch` sequences with i.i.d. uniform symbols.
pub fn gen_copying_batch<R: Rng + ?Sized>(cfg: &CopyConfig, rng: &mut R) -> Result<CopyBatch> {
    cfg.validate()?;
    let mut inputs = Vec::with_capacity(cfg.batch);
    let mut targets = Vec::with_capacity(cfg.batch);
    for _ in 0..cfg.batch {
        let symbols: Vec<usize> = (0..cfg.copy_len)
            .map(|_| rng.random_range(0..cfg.alphabet))
            .collect();
        let (i, t) = copying_pair(cfg, &symbols)?;
        inputs.push(i);
        targets.push(t);
    }
    Ok(CopyBatch { inputs, targets })
}

/// Cross entropy of the memoryless strategy (blanks, then uniform guesses):
/// `K ln N / (L + 2K)`.
pub fn copying_baseline(cfg: &CopyConfig) -> f64 {
    cfg.copy_len as f64 * (cfg.alphabet as f64).ln() / cfg.seq_len() as f64
}

/// Text rendering: symbol `s` as the digit `s + 1`, blank `-`, start `:`.
pub fn render(cfg: &CopyConfig, tokens: &[usize]) -> String {
    tokens
        .iter()
        .map(|&t| {
            if t == cfg.blank() {
                '-'
            } else if t == cfg.start() {
                ':'
            } else {
                char::from_digit((t + 1) as u32, 36).unwrap_or('?')
            }
        })
        .collect()
}
