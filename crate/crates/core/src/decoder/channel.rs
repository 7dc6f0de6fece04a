use std::fmt::Write as _;
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Location, Result};

use super::lexicon::{Alphabet, Phoneme};

/// How alignments between spoken and heard phonemes are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    /// Sum over every alignment.
    Marginal,
    /// Only the single best alignment.
    Viterbi,
}

/// Noisy channel from spoken to heard phonemes.
///
/// Before each spoken phoneme and after the last one, the channel emits a
/// geometric number of inserted symbols: another insertion with probability
/// `insertion`, each symbol uniform over the alphabet. Each spoken phoneme is
/// then deleted with probability `deletion`, or else replaced by a symbol
/// drawn from its row of the substitution matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    alphabet: Alphabet,
    substitution: Vec<Vec<f64>>,
    insertion: f64,
    deletion: f64,
    logs: LogTables,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LogTables {
    /// `ln((1 - deletion) * S[p][q])`, row-major by spoken phoneme.
    pub emit: Vec<f64>,
    pub delete: f64,
    /// `ln(insertion / |alphabet|)`.
    pub insert: f64,
    /// `ln(1 - insertion)`, closing a gap.
    pub stop: f64,
    pub width: usize,
}

impl LogTables {
    #[inline]
    pub fn emit(&self, p: Phoneme, q: Phoneme) -> f64 {
        self.emit[p as usize * self.width + q as usize]
    }

    /// Score of a gap holding `n` inserted symbols.
    pub fn gap(&self, n: usize) -> f64 {
        if n == 0 {
            self.stop
        } else {
            n as f64 * self.insert + self.stop
        }
    }
}

impl ChannelModel {
    pub fn new(
        alphabet: Alphabet,
        substitution: Vec<Vec<f64>>,
        insertion: f64,
        deletion: f64,
    ) -> Result<Self> {
        let a = alphabet.len();
        if substitution.len() != a {
            return Err(Error::InvalidParameter(format!(
                "substitution matrix has {} rows for {a} phonemes",
                substitution.len()
            )));
        }
        for (i, row) in substitution.iter().enumerate() {
            if row.len() != a || row.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::InvalidParameter(format!(
                    "bad substitution row for {:?}",
                    alphabet.symbol(i as Phoneme)
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "substitution row for {:?} sums to {sum}",
                    alphabet.symbol(i as Phoneme)
                )));
            }
        }
        if !(0.0..1.0).contains(&insertion) {
            return Err(Error::InvalidParameter(format!(
                "insertion probability {insertion} outside [0, 1)"
            )));
        }
        if !(0.0..=1.0).contains(&deletion) {
            return Err(Error::InvalidParameter(format!(
                "deletion probability {deletion} outside [0, 1]"
            )));
        }
        let keep = (1.0 - deletion).ln();
        let emit = substitution
            .iter()
            .flat_map(|row| row.iter().map(move |&s| keep + s.ln()))
            .collect();
        let logs = LogTables {
            emit,
            delete: deletion.ln(),
            insert: (insertion / a as f64).ln(),
            stop: (1.0 - insertion).ln(),
            width: a,
        };
        Ok(Self {
            alphabet,
            substitution,
            insertion,
            deletion,
            logs,
        })
    }

    /// Identity channel: heard equals spoken.
    pub fn noiseless(alphabet: Alphabet) -> Self {
        Self::uniform_confusion(alphabet, 0.0, 0.0, 0.0).expect("valid rates")
    }

    /// Keeps a phoneme with probability `1 - substitution`, spreading the
    /// rest evenly over the other symbols.
    pub fn uniform_confusion(
        alphabet: Alphabet,
        substitution: f64,
        insertion: f64,
        deletion: f64,
    ) -> Result<Self> {
        let a = alphabet.len();
        if !(0.0..=1.0).contains(&substitution) || (a == 1 && substitution > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "substitution probability {substitution} not usable with {a} phonemes"
            )));
        }
        let off = if a > 1 {
            substitution / (a - 1) as f64
        } else {
            0.0
        };
        let matrix = (0..a)
            .map(|i| {
                (0..a)
                    .map(|j| if i == j { 1.0 - substitution } else { off })
                    .collect()
            })
            .collect();
        Self::new(alphabet, matrix, insertion, deletion)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn insertion(&self) -> f64 {
        self.insertion
    }

    pub fn deletion(&self) -> f64 {
        self.deletion
    }

    pub fn substitution(&self, spoken: &str, heard: &str) -> Result<f64> {
        let p = self.alphabet.id(spoken)?;
        let q = self.alphabet.id(heard)?;
        Ok(self.substitution[p as usize][q as usize])
    }

    pub(crate) fn logs(&self) -> &LogTables {
        &self.logs
    }

    /// Samples a heard sequence. The same seed always gives the same output.
    pub fn corrupt<S: AsRef<str>>(&self, spoken: &[S], seed: u64) -> Result<Vec<String>> {
        let ids = self.alphabet.encode(spoken)?;
        Ok(self.alphabet.decode(&self.corrupt_ids(&ids, seed)))
    }

    pub fn corrupt_ids(&self, spoken: &[Phoneme], seed: u64) -> Vec<Phoneme> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = self.alphabet.len();
        let mut out = Vec::with_capacity(spoken.len());
        let gap = |rng: &mut ChaCha8Rng, out: &mut Vec<Phoneme>| {
            while self.insertion > 0.0 && rng.random::<f64>() < self.insertion {
                out.push(rng.random_range(0..a) as Phoneme);
            }
        };
        gap(&mut rng, &mut out);
        for &p in spoken {
            let deleted = self.deletion > 0.0 && rng.random::<f64>() < self.deletion;
            if !deleted {
                out.push(self.sample_row(p, rng.random::<f64>()));
            }
            gap(&mut rng, &mut out);
        }
        out
    }

    fn sample_row(&self, p: Phoneme, u: f64) -> Phoneme {
        let row = &self.substitution[p as usize];
        let mut acc = 0.0;
        let mut last = p;
        for (q, &s) in row.iter().enumerate() {
            if s <= 0.0 {
                continue;
            }
            acc += s;
            last = q as Phoneme;
            if u < acc {
                return last;
            }
        }
        last
    }

    /// `ln P(heard | spoken)`, or the best single alignment under `Viterbi`.
    pub fn log_likelihood<S: AsRef<str>, T: AsRef<str>>(
        &self,
        spoken: &[S],
        heard: &[T],
        mode: Alignment,
    ) -> Result<f64> {
        let spoken = self.alphabet.encode(spoken)?;
        let heard = self.alphabet.encode(heard)?;
        Ok(self.log_likelihood_ids(&spoken, &heard, mode))
    }

    pub fn log_likelihood_ids(
        &self,
        spoken: &[Phoneme],
        heard: &[Phoneme],
        mode: Alignment,
    ) -> f64 {
        let plus = match mode {
            Alignment::Marginal => log_add,
            Alignment::Viterbi => f64::max,
        };
        let l = &self.logs;
        let m = heard.len();
        // g[j]: after a closed gap, `j` heard symbols consumed.
        let mut g = vec![f64::NEG_INFINITY; m + 1];
        for (j, x) in g.iter_mut().enumerate() {
            *x = l.gap(j);
        }
        let mut h = vec![f64::NEG_INFINITY; m + 1];
        for &p in spoken {
            for j in 0..=m {
                let mut v = g[j] + l.delete;
                if j > 0 {
                    v = plus(v, g[j - 1] + l.emit(p, heard[j - 1]));
                }
                h[j] = v;
            }
            // open gap: absorb insertions, then close it
            let mut open = f64::NEG_INFINITY;
            for j in 0..=m {
                open = if j == 0 {
                    h[0]
                } else {
                    plus(h[j], open + l.insert)
                };
                g[j] = open + l.stop;
            }
        }
        g[m]
    }

    /// Text format: `alphabet`, `insertion`, `deletion` lines, then one row
    /// per spoken phoneme (`symbol p1 p2 ...` in alphabet order).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "alphabet {}", self.alphabet.symbols().join(" "));
        let _ = writeln!(out, "insertion {}", self.insertion);
        let _ = writeln!(out, "deletion {}", self.deletion);
        for (i, row) in self.substitution.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(
                out,
                "{} {}",
                self.alphabet.symbol(i as Phoneme),
                cells.join(" ")
            );
        }
        out
    }

    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut alphabet: Option<Alphabet> = None;
        let mut insertion = None;
        let mut deletion = None;
        let mut rows: Vec<Option<Vec<f64>>> = Vec::new();
        let err = |line: usize, message: String| Error::Parse {
            location: Location::at(0).line(line),
            message,
        };
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let mut parts = line.split_whitespace();
            let Some(head) = parts.next() else { continue };
            if head.starts_with('#') {
                continue;
            }
            let number = |s: Option<&str>| -> Result<f64> {
                s.and_then(|x| x.parse().ok())
                    .ok_or_else(|| err(lineno, format!("expected a number after {head:?}")))
            };
            match head {
                "alphabet" => {
                    let a = Alphabet::new(parts).map_err(|e| err(lineno, e.to_string()))?;
                    rows = vec![None; a.len()];
                    alphabet = Some(a);
                }
                "insertion" => insertion = Some(number(parts.next())?),
                "deletion" => deletion = Some(number(parts.next())?),
                symbol => {
                    let a = alphabet
                        .as_ref()
                        .ok_or_else(|| err(lineno, "row before `alphabet` line".into()))?;
                    let p = a.id(symbol).map_err(|e| err(lineno, e.to_string()))?;
                    let row: Vec<f64> = parts
                        .map(|x| x.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| err(lineno, e.to_string()))?;
                    rows[p as usize] = Some(row);
                }
            }
        }
        let alphabet = alphabet.ok_or_else(|| err(0, "missing `alphabet` line".into()))?;
        let matrix = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                r.ok_or_else(|| {
                    err(
                        0,
                        format!("no row for phoneme {:?}", alphabet.symbol(i as Phoneme)),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            alphabet,
            matrix,
            insertion.unwrap_or(0.0),
            deletion.unwrap_or(0.0),
        )
    }
}

/// `ln(e^a + e^b)` without overflow.
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}
