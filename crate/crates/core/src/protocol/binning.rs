//! Index-space model of a-posteriori binning.
//!
//! A codebook of `M` codeword indices is split into `B` pre-bins of `M/B`
//! codewords; the encrypted message selects the codeword inside a randomly
//! chosen bin. Once the frame is over, both ends group the bins into `K`
//! super-bins with a shared recipe and keep the super-bin index of the
//! transmitted codeword as the next frame's key.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Stream reserved for the frame-independent pre-binning permutation.
const PRE_BIN_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinningRecipe {
    /// Seeded pseudo-random permutations of codewords and of bins.
    Random,
    /// Contiguous blocks: bin `c / (M/B)`, super-bin `bin / (B/K)`.
    Structured,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyBinning {
    codebook_size: usize,
    pre_bins: usize,
    super_bins: usize,
    seed: u64,
    recipe: BinningRecipe,
    /// Position of each codeword in the pre-binned order (random recipe).
    position: Vec<usize>,
    /// Codeword at each position (random recipe).
    codeword_at: Vec<usize>,
}

impl ToyBinning {
    pub fn new(codebook_size: usize, pre_bins: usize, super_bins: usize, seed: u64, recipe: BinningRecipe) -> Result<Self> {
        if codebook_size == 0 || pre_bins == 0 || super_bins == 0 {
            return Err(Error::Divisibility("codebook, bin and super-bin counts must be positive".into()));
        }
        if !codebook_size.is_multiple_of(pre_bins) {
            return Err(Error::Divisibility(format!(
                "{pre_bins} pre-bins do not divide a codebook of {codebook_size}"
            )));
        }
        if !pre_bins.is_multiple_of(super_bins) {
            return Err(Error::Divisibility(format!(
                "{super_bins} super-bins do not divide {pre_bins} pre-bins"
            )));
        }
        let (position, codeword_at) = match recipe {
            BinningRecipe::Structured => (Vec::new(), Vec::new()),
            BinningRecipe::Random => {
                let mut order: Vec<usize> = (0..codebook_size).collect();
                order.shuffle(&mut stream_rng(seed, PRE_BIN_STREAM));
                let mut position = vec![0; codebook_size];
                for (pos, &c) in order.iter().enumerate() {
                    position[c] = pos;
                }
                (position, order)
            }
        };
        Ok(Self {
            codebook_size,
            pre_bins,
            super_bins,
            seed,
            recipe,
            position,
            codeword_at,
        })
    }

    /// Same binning with a key space of `2^key_bits` super-bins.
    pub fn with_key_bits(codebook_size: usize, pre_bins: usize, key_bits: u32, seed: u64, recipe: BinningRecipe) -> Result<Self> {
        let super_bins = 1usize
            .checked_shl(key_bits)
            .ok_or_else(|| Error::Divisibility(format!("2^{key_bits} super-bins overflow")))?;
        Self::new(codebook_size, pre_bins, super_bins, seed, recipe)
    }

    pub fn codebook_size(&self) -> usize {
        self.codebook_size
    }

    pub fn pre_bins(&self) -> usize {
        self.pre_bins
    }

    pub fn super_bins(&self) -> usize {
        self.super_bins
    }

    pub fn recipe(&self) -> BinningRecipe {
        self.recipe
    }

    /// Codewords per pre-bin, i.e. the size of the encrypted-message space.
    pub fn bin_size(&self) -> usize {
        self.codebook_size / self.pre_bins
    }

    pub fn bins_per_super_bin(&self) -> usize {
        self.pre_bins / self.super_bins
    }

    /// Key size in bits, `log2 K`.
    pub fn key_bits(&self) -> f64 {
        (self.super_bins as f64).log2()
    }

    fn check_codeword(&self, codeword: usize) -> Result<()> {
        if codeword >= self.codebook_size {
            return Err(Error::Domain(format!(
                "codeword {codeword} outside a codebook of {}",
                self.codebook_size
            )));
        }
        Ok(())
    }

    fn position_of(&self, codeword: usize) -> usize {
        match self.recipe {
            BinningRecipe::Structured => codeword,
            BinningRecipe::Random => self.position[codeword],
        }
    }

    pub fn bin_of(&self, codeword: usize) -> Result<usize> {
        self.check_codeword(codeword)?;
        Ok(self.position_of(codeword) / self.bin_size())
    }

    /// Codeword carrying `message` inside `bin`.
    pub fn codeword(&self, bin: usize, message: usize) -> Result<usize> {
        if bin >= self.pre_bins || message >= self.bin_size() {
            return Err(Error::Domain(format!(
                "bin {bin} / message {message} outside {} bins of {} codewords",
                self.pre_bins,
                self.bin_size()
            )));
        }
        let pos = bin * self.bin_size() + message;
        Ok(match self.recipe {
            BinningRecipe::Structured => pos,
            BinningRecipe::Random => self.codeword_at[pos],
        })
    }

    /// Message index of a codeword within its bin.
    pub fn message_of(&self, codeword: usize) -> Result<usize> {
        self.check_codeword(codeword)?;
        Ok(self.position_of(codeword) % self.bin_size())
    }

    /// Super-bin of every bin for one frame.
    pub fn super_bin_map(&self, frame: u64) -> Vec<usize> {
        let per = self.bins_per_super_bin();
        match self.recipe {
            BinningRecipe::Structured => (0..self.pre_bins).map(|b| b / per).collect(),
            BinningRecipe::Random => {
                let mut order: Vec<usize> = (0..self.pre_bins).collect();
                order.shuffle(&mut stream_rng(self.seed, frame));
                let mut map = vec![0; self.pre_bins];
                for (pos, &b) in order.iter().enumerate() {
                    map[b] = pos / per;
                }
                map
            }
        }
    }

    /// Key distilled after `frame` from the transmitted codeword. Both ends
    /// call this with their own copy of the binning and must agree.
    pub fn distill_key(&self, frame: u64, codeword: usize) -> Result<usize> {
        let bin = self.bin_of(codeword)?;
        Ok(self.super_bin_map(frame)[bin])
    }

    /// Encoding with a-posteriori binning: a uniformly random bin, then the
    /// message picks the codeword.
    pub fn encode<R: Rng + ?Sized>(&self, message: usize, rng: &mut R) -> Result<usize> {
        let bin = rng.random_range(0..self.pre_bins);
        self.codeword(bin, message)
    }

    /// Encoding with the key fixed up front: a uniformly random bin among
    /// those of super-bin `key`, then the message picks the codeword.
    pub fn encode_with_key<R: Rng + ?Sized>(&self, frame: u64, key: usize, message: usize, rng: &mut R) -> Result<usize> {
        let bins = self.bins_in_super_bin(frame, key)?;
        let bin = bins[rng.random_range(0..bins.len())];
        self.codeword(bin, message)
    }

    /// Bins grouped into super-bin `key` for `frame`, ascending.
    pub fn bins_in_super_bin(&self, frame: u64, key: usize) -> Result<Vec<usize>> {
        if key >= self.super_bins {
            return Err(Error::Domain(format!("key {key} outside {} super-bins", self.super_bins)));
        }
        Ok(self
            .super_bin_map(frame)
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == key)
            .map(|(b, _)| b)
            .collect())
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// What Eve learns about the transmitted codeword.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EveObservation {
    /// Eve knows the codeword index modulo `M / ambiguity`, leaving
    /// `ambiguity` candidates.
    Residue { ambiguity: usize },
    /// Eve knows which group of a seeded random partition into groups of
    /// `ambiguity` codewords was sent.
    RandomPartition { ambiguity: usize, seed: u64 },
}

impl EveObservation {
    fn ambiguity(&self) -> usize {
        match *self {
            EveObservation::Residue { ambiguity } | EveObservation::RandomPartition { ambiguity, .. } => ambiguity,
        }
    }
}

/// Partition of the codebook into Eve's candidate sets.
fn candidate_sets(codebook_size: usize, observation: &EveObservation) -> Result<Vec<Vec<usize>>> {
    let a = observation.ambiguity();
    if a == 0 || !codebook_size.is_multiple_of(a) {
        return Err(Error::Divisibility(format!(
            "ambiguity {a} does not divide a codebook of {codebook_size}"
        )));
    }
    let groups = codebook_size / a;
    Ok(match *observation {
        EveObservation::Residue { .. } => (0..groups).map(|r| (0..a).map(|j| r + j * groups).collect()).collect(),
        EveObservation::RandomPartition { seed, .. } => {
            let mut order: Vec<usize> = (0..codebook_size).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            order.chunks(a).map(|c| c.to_vec()).collect()
        }
    })
}

/// Entropy in bits of the key over a set of equally likely codewords.
fn key_entropy(super_map: &[usize], binning: &ToyBinning, set: &[usize]) -> Result<f64> {
    let mut counts = vec![0usize; binning.super_bins()];
    for &c in set {
        counts[super_map[binning.bin_of(c)?]] += 1;
    }
    let total = set.len() as f64;
    Ok(counts
        .iter()
        .filter(|&&k| k > 0)
        .map(|&k| {
            let p = k as f64 / total;
            -p * p.log2()
        })
        .sum())
}

fn normalize(entropy: f64, binning: &ToyBinning) -> f64 {
    if binning.super_bins() == 1 {
        // A one-value key has nothing to leak.
        1.0
    } else {
        (entropy / binning.key_bits()).clamp(0.0, 1.0)
    }
}

/// `H(key | Eve's candidate set) / log2 K` averaged over every codeword of
/// the codebook, for the super-binning of `frame`.
pub fn exact_equivocation(binning: &ToyBinning, observation: &EveObservation, frame: u64) -> Result<f64> {
    let sets = candidate_sets(binning.codebook_size(), observation)?;
    let map = binning.super_bin_map(frame);
    let mut total = 0.0;
    for set in &sets {
        total += key_entropy(&map, binning, set)?;
    }
    Ok(normalize(total / sets.len() as f64, binning))
}

/// Monte-Carlo estimate of Eve's normalized key equivocation: each trial is a
/// fresh frame with a uniformly drawn transmitted codeword.
pub fn measure_equivocation(binning: &ToyBinning, observation: &EveObservation, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    let sets = candidate_sets(binning.codebook_size(), observation)?;
    let mut set_of = vec![0usize; binning.codebook_size()];
    for (g, set) in sets.iter().enumerate() {
        for &c in set {
            set_of[c] = g;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for trial in 0..trials {
        let c = rng.random_range(0..binning.codebook_size());
        let map = binning.super_bin_map(trial as u64);
        total += key_entropy(&map, binning, &sets[set_of[c]])?;
    }
    Ok(normalize(total / trials as f64, binning))
}
