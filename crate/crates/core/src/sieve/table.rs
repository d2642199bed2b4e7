//! Smallest-prime-factor and Möbius tables with a binary cache.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::SieveError;

pub const DEFAULT_MAX_LIMIT: u64 = 1_000_000_000;

const MAGIC: &[u8; 4] = b"PPLT";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    spf: Vec<u32>,
    mu: Vec<i8>,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn build(limit: u64) -> Result<Self, SieveError> {
        Self::build_with_max(limit, DEFAULT_MAX_LIMIT)
    }

    pub fn build_with_max(limit: u64, max_limit: u64) -> Result<Self, SieveError> {
        if limit > max_limit || limit >= u32::MAX as u64 {
            return Err(SieveError::TableLimit { limit, max: max_limit.min(u32::MAX as u64 - 1) });
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut mu = vec![0i8; n + 1];
        let mut primes: Vec<u64> = Vec::new();
        if n >= 1 {
            mu[1] = 1;
            spf[1] = 1;
        }
        // linear sieve: each composite is crossed off once by its smallest prime
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                mu[i] = -1;
                primes.push(i as u64);
            }
            let si = spf[i] as u64;
            for &p in &primes {
                if p > si || p as usize * i > n {
                    break;
                }
                let j = p as usize * i;
                spf[j] = p as u32;
                mu[j] = if p == si { 0 } else { -mu[i] };
            }
        }
        Ok(PrimeTable { limit, spf, mu, primes })
    }

    fn from_spf(limit: u64, spf: Vec<u32>) -> Self {
        let n = limit as usize;
        let mut mu = vec![0i8; n + 1];
        let mut primes = Vec::new();
        if n >= 1 {
            mu[1] = 1;
        }
        for i in 2..=n {
            let p = spf[i] as usize;
            if p == i {
                primes.push(i as u64);
                mu[i] = -1;
            } else {
                let q = i / p;
                mu[i] = if q.is_multiple_of(p) { 0 } else { -mu[q] };
            }
        }
        PrimeTable { limit, spf, mu, primes }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes `p` with `lo <= p < hi`.
    pub fn primes_in(&self, lo: u64, hi: u64) -> &[u64] {
        let a = self.primes.partition_point(|&p| p < lo);
        let b = self.primes.partition_point(|&p| p < hi);
        &self.primes[a..b.max(a)]
    }

    fn check(&self, n: u64) -> Result<usize, SieveError> {
        if n > self.limit {
            Err(SieveError::TableTooSmall { needed: n, limit: self.limit })
        } else {
            Ok(n as usize)
        }
    }

    pub fn spf(&self, n: u64) -> Result<u64, SieveError> {
        Ok(self.spf[self.check(n)?] as u64)
    }

    pub fn mu(&self, n: u64) -> Result<i8, SieveError> {
        Ok(self.mu[self.check(n)?])
    }

    pub fn is_prime(&self, n: u64) -> Result<bool, SieveError> {
        let i = self.check(n)?;
        Ok(i >= 2 && self.spf[i] as usize == i)
    }

    /// Distinct prime factors in increasing order.
    pub fn distinct_prime_factors(&self, n: u64) -> Result<Vec<u64>, SieveError> {
        let mut m = self.check(n)?;
        let mut out = Vec::new();
        while m > 1 {
            let p = self.spf[m] as usize;
            out.push(p as u64);
            while m % p == 0 {
                m /= p;
            }
        }
        Ok(out)
    }

    /// Number of divisors of `n`.
    pub fn divisor_count(&self, n: u64) -> Result<u64, SieveError> {
        let mut m = self.check(n)?;
        let mut tau = 1u64;
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            tau *= e + 1;
        }
        Ok(tau)
    }

    /// Writes the little-endian cache: magic, version, limit, spf entries.
    pub fn write_cache(&self, path: &Path) -> Result<(), SieveError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.limit.to_le_bytes())?;
        for &s in &self.spf {
            w.write_all(&s.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Self, SieveError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(SieveError::BadCache("wrong magic".into()));
        }
        let mut v = [0u8; 4];
        r.read_exact(&mut v)?;
        let version = u32::from_le_bytes(v);
        if version != VERSION {
            return Err(SieveError::BadCache(format!("unsupported version {version}")));
        }
        let mut l = [0u8; 8];
        r.read_exact(&mut l)?;
        let limit = u64::from_le_bytes(l);
        if limit >= u32::MAX as u64 {
            return Err(SieveError::BadCache(format!("limit {limit} out of range")));
        }
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != (limit as usize + 1) * 4 {
            return Err(SieveError::BadCache("truncated spf table".into()));
        }
        let spf: Vec<u32> = bytes.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
        Ok(Self::from_spf(limit, spf))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        let t = PrimeTable::build(100).unwrap();
        assert_eq!(t.mu(1).unwrap(), 1);
        assert_eq!(t.mu(6).unwrap(), 1);
        assert_eq!(t.mu(12).unwrap(), 0);
        assert_eq!(t.mu(30).unwrap(), -1);
        assert_eq!(t.primes_in(0, 11), &[2, 3, 5, 7]);
        assert_eq!(t.distinct_prime_factors(60).unwrap(), vec![2, 3, 5]);
        assert_eq!(t.divisor_count(60).unwrap(), 12);
        assert!(matches!(t.mu(101), Err(SieveError::TableTooSmall { needed: 101, limit: 100 })));
    }

    #[test]
    fn cache_roundtrip() {
        let t = PrimeTable::build(1000).unwrap();
        let dir = std::env::temp_dir().join(format!("pplt-test-{}", std::process::id()));
        t.write_cache(&dir).unwrap();
        let back = PrimeTable::read_cache(&dir).unwrap();
        std::fs::remove_file(&dir).ok();
        assert_eq!(t, back);
    }
}
