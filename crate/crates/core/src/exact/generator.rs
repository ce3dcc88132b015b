use std::fmt;
use std::sync::{Arc, Mutex, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{ExactError, Rational, SymbolicReal};

/// Closed rational interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn point(q: Rational) -> Self {
        Interval {
            lo: q.clone(),
            hi: q,
        }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

pub type StreamFn = dyn Fn(usize) -> (Rational, Rational) + Send + Sync;

/// Source of nested enclosures for one generator.
#[derive(Clone)]
pub enum Oracle {
    /// Positive square root of a rational that is not a rational square.
    Sqrt(Rational),
    /// Fractional part of the golden ratio, `(√5 − 1)/2`, bracketed by
    /// consecutive continued-fraction convergents.
    Golden,
    /// User-supplied nested interval stream. Each call must return an
    /// interval containing the value; the table intersects successive
    /// answers and keeps pulling until the width halves.
    Stream(Arc<StreamFn>),
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Oracle::Sqrt(d) => write!(f, "Sqrt({d})"),
            Oracle::Golden => write!(f, "Golden"),
            Oracle::Stream(_) => write!(f, "Stream(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenId(pub(crate) usize);

impl GenId {
    pub fn index(self) -> usize {
        self.0
    }
}

struct CacheState {
    levels: Vec<Interval>,
    // next stream index / next convergent index
    cursor: usize,
}

struct Generator {
    name: String,
    oracle: Oracle,
    cache: Mutex<CacheState>,
}

/// Append-only registry of irrational generators shared by every
/// [`SymbolicReal`] built over it. Enclosure caches are internally
/// synchronized, so a table can be read from many threads.
pub struct GeneratorTable {
    gens: RwLock<Vec<Arc<Generator>>>,
}

impl fmt::Debug for GeneratorTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens = self.gens.read().expect("generator table poisoned");
        f.debug_list()
            .entries(gens.iter().map(|g| (&g.name, &g.oracle)))
            .finish()
    }
}

fn is_rational_square(q: &Rational) -> bool {
    let n = q.numer();
    let d = q.denom();
    let sn = n.sqrt();
    let sd = d.sqrt();
    &(&sn * &sn) == n && &(&sd * &sd) == d
}

fn two() -> Rational {
    BigRational::from_integer(BigInt::from(2))
}

impl GeneratorTable {
    pub fn new() -> Arc<Self> {
        Arc::new(GeneratorTable {
            gens: RwLock::new(Vec::new()),
        })
    }

    pub fn len(&self) -> usize {
        self.gens.read().expect("generator table poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Declares a new generator and returns it as a value.
    pub fn declare(self: &Arc<Self>, name: &str, oracle: Oracle) -> Result<SymbolicReal, ExactError> {
        if name.is_empty()
            || !name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            return Err(ExactError::InvalidOracle(format!("bad generator name `{name}`")));
        }
        let first = match &oracle {
            Oracle::Sqrt(d) => {
                if !d.is_positive() {
                    return Err(ExactError::InvalidOracle(format!("sqrt of non-positive {d}")));
                }
                if is_rational_square(d) {
                    return Err(ExactError::InvalidOracle(format!("sqrt({d}) is rational")));
                }
                let a = BigRational::from_integer(d.floor().to_integer().sqrt());
                Interval {
                    hi: &a + Rational::one(),
                    lo: a,
                }
            }
            Oracle::Golden => Interval {
                lo: Rational::zero(),
                hi: Rational::one(),
            },
            Oracle::Stream(f) => {
                let (lo, hi) = f(0);
                if lo >= hi {
                    return Err(ExactError::InvalidOracle(format!(
                        "stream for `{name}` starts with a degenerate interval [{lo}, {hi}]"
                    )));
                }
                Interval { lo, hi }
            }
        };
        let mut gens = self.gens.write().expect("generator table poisoned");
        if gens.iter().any(|g| g.name == name) {
            return Err(ExactError::DuplicateGenerator(name.to_string()));
        }
        let id = GenId(gens.len());
        gens.push(Arc::new(Generator {
            name: name.to_string(),
            oracle,
            cache: Mutex::new(CacheState {
                levels: vec![first],
                cursor: 1,
            }),
        }));
        drop(gens);
        Ok(SymbolicReal::generator(self.clone(), id))
    }

    pub fn sqrt(self: &Arc<Self>, name: &str, radicand: Rational) -> Result<SymbolicReal, ExactError> {
        self.declare(name, Oracle::Sqrt(radicand))
    }

    pub fn golden(self: &Arc<Self>, name: &str) -> Result<SymbolicReal, ExactError> {
        self.declare(name, Oracle::Golden)
    }

    pub fn lookup(&self, name: &str) -> Option<GenId> {
        let gens = self.gens.read().expect("generator table poisoned");
        gens.iter().position(|g| g.name == name).map(GenId)
    }

    /// The generator `name` as a value of this table.
    pub fn value_of(self: &Arc<Self>, name: &str) -> Result<SymbolicReal, ExactError> {
        self.lookup(name)
            .map(|id| SymbolicReal::generator(self.clone(), id))
            .ok_or_else(|| ExactError::UnknownGenerator(name.to_string()))
    }

    pub fn name(&self, id: GenId) -> String {
        let gens = self.gens.read().expect("generator table poisoned");
        gens[id.0].name.clone()
    }

    pub fn names(&self) -> Vec<String> {
        let gens = self.gens.read().expect("generator table poisoned");
        gens.iter().map(|g| g.name.clone()).collect()
    }

    pub fn oracle(&self, id: GenId) -> Oracle {
        let gens = self.gens.read().expect("generator table poisoned");
        gens[id.0].oracle.clone()
    }

    fn get(&self, id: GenId) -> Arc<Generator> {
        let gens = self.gens.read().expect("generator table poisoned");
        gens[id.0].clone()
    }

    /// Enclosure of generator `id` after `level` refinements. Successive
    /// levels are nested and each has at most half the previous width.
    pub fn enclosure(&self, id: GenId, level: usize) -> Interval {
        let g = self.get(id);
        let mut cache = g.cache.lock().expect("enclosure cache poisoned");
        while cache.levels.len() <= level {
            let prev = cache.levels.last().expect("cache starts non-empty").clone();
            let next = refine(&g.oracle, &prev, &mut cache.cursor);
            cache.levels.push(next);
        }
        cache.levels[level].clone()
    }
}

fn refine(oracle: &Oracle, prev: &Interval, cursor: &mut usize) -> Interval {
    let target = prev.width() / two();
    match oracle {
        Oracle::Sqrt(d) => {
            let mid = prev.midpoint();
            if &(&mid * &mid) < d {
                Interval {
                    lo: mid,
                    hi: prev.hi.clone(),
                }
            } else {
                Interval {
                    lo: prev.lo.clone(),
                    hi: mid,
                }
            }
        }
        Oracle::Golden => {
            // c_j = F_j / F_{j+1}; consecutive convergents bracket the value.
            loop {
                let j = *cursor;
                let (a, b) = (convergent(j), convergent(j + 1));
                let iv = if a < b {
                    Interval { lo: a, hi: b }
                } else {
                    Interval { lo: b, hi: a }
                };
                *cursor += 1;
                if iv.width() <= target {
                    return iv;
                }
            }
        }
        Oracle::Stream(f) => {
            let mut lo = prev.lo.clone();
            let mut hi = prev.hi.clone();
            for _ in 0..10_000 {
                let (a, b) = f(*cursor);
                *cursor += 1;
                if a > lo {
                    lo = a;
                }
                if b < hi {
                    hi = b;
                }
                if lo >= hi {
                    panic!("enclosure stream collapsed to [{lo}, {hi}]; the stream is not nested around an irrational");
                }
                if &hi - &lo <= target {
                    return Interval { lo, hi };
                }
            }
            panic!("enclosure stream stalled: width did not halve after 10000 pulls");
        }
    }
}

fn fib_pair(j: usize) -> (BigInt, BigInt) {
    let mut a = BigInt::zero();
    let mut b = BigInt::one();
    for _ in 0..j {
        let c = &a + &b;
        a = b;
        b = c;
    }
    (a, b)
}

fn convergent(j: usize) -> Rational {
    let (f, g) = fib_pair(j);
    BigRational::new(f, g)
}
