use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A truncated element of `ℝ_+^∞`: nonnegative per-level bounds
/// `s_0, ..., s_N`. `+∞` is admitted as the "unbounded" sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSeq<T> {
    values: Vec<T>,
}

impl<T: Scalar> BoundSeq<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        for (index, v) in values.iter().enumerate() {
            if v.is_nan() || *v < T::zero() {
                return Err(Error::NegativeBound { index, value: v.as_f64() });
            }
        }
        Ok(Self { values })
    }

    pub fn constant(len: usize, value: T) -> Result<Self> {
        Self::new(vec![value; len])
    }

    pub fn zeros(len: usize) -> Self {
        Self { values: vec![T::zero(); len] }
    }

    pub fn ones(len: usize) -> Self {
        Self { values: vec![T::one(); len] }
    }

    pub fn unbounded(len: usize) -> Self {
        Self { values: vec![T::infinity(); len] }
    }

    /// The unit ball of level `level`: `s_level = 1`, every other entry
    /// unbounded.
    pub fn unit_ball(len: usize, level: usize) -> Result<Self> {
        if level >= len {
            return Err(Error::LevelRange { level, max: len.saturating_sub(1) });
        }
        let mut values = vec![T::infinity(); len];
        values[level] = T::one();
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, level: usize) -> T {
        self.values[level]
    }

    /// Entrywise product `u.s = (u_i s_i)`, with `0 · ∞ = 0`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { left: self.len(), right: other.len() });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&u, &s)| if u.is_zero() || s.is_zero() { T::zero() } else { u * s })
            .collect();
        Ok(Self { values })
    }

    /// Scalar multiple `t·s` for `t >= 0`.
    pub fn scaled(&self, factor: T) -> Self {
        debug_assert!(factor >= T::zero());
        let values =
            self.values.iter().map(|&s| if factor.is_zero() || s.is_zero() { T::zero() } else { s * factor }).collect();
        Self { values }
    }

    /// Entrywise reciprocals `(1/c_n)`; used for `b = (c_n^{-1})`.
    pub fn reciprocal(&self) -> Result<Self> {
        for (level, &c) in self.values.iter().enumerate() {
            if !(c > T::zero()) || c.is_infinite() {
                return Err(Error::NonPositiveConstant { level, value: c.as_f64() });
            }
        }
        Ok(Self { values: self.values.iter().map(|&c| c.recip()).collect() })
    }

    /// Drops the first `d` levels: `(s_d, ..., s_N)`.
    pub fn shift_levels(&self, d: usize) -> Result<Self> {
        if d >= self.len() {
            return Err(Error::LevelRange { level: d, max: self.len().saturating_sub(1) });
        }
        Ok(Self { values: self.values[d..].to_vec() })
    }

    /// Keeps levels `0..len`.
    pub fn truncated(&self, len: usize) -> Self {
        Self { values: self.values[..len.min(self.len())].to_vec() }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.as_f64()).collect()
    }
}

/// Entrywise product of two bound sequences.
pub fn bound_product<T: Scalar>(u: &BoundSeq<T>, s: &BoundSeq<T>) -> Result<BoundSeq<T>> {
    u.product(s)
}

/// `(s_d, ..., s_N)`: reindexes the target grading so a derivative loss `d`
/// becomes zero.
pub fn shift_levels<T: Scalar>(s: &BoundSeq<T>, d: usize) -> Result<BoundSeq<T>> {
    s.shift_levels(d)
}

impl<T: Scalar> Serialize for BoundSeq<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.values.len()))?;
        for v in &self.values {
            if v.is_infinite() {
                seq.serialize_element("inf")?;
            } else {
                seq.serialize_element(&v.as_f64())?;
            }
        }
        seq.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BoundEntry {
    Number(f64),
    Text(String),
}

impl<'de, T: Scalar> Deserialize<'de> for BoundSeq<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct SeqVisitor<T>(std::marker::PhantomData<T>);

        impl<'de, T: Scalar> Visitor<'de> for SeqVisitor<T> {
            type Value = BoundSeq<T>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an array of nonnegative numbers or \"inf\"")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Self::Value, A::Error> {
                let mut values = Vec::new();
                while let Some(entry) = seq.next_element::<BoundEntry>()? {
                    let v = match entry {
                        BoundEntry::Number(v) => T::lit(v),
                        BoundEntry::Text(s) if s == "inf" => T::infinity(),
                        BoundEntry::Text(s) => return Err(de::Error::custom(format!("unexpected bound entry {s:?}"))),
                    };
                    values.push(v);
                }
                BoundSeq::new(values).map_err(de::Error::custom)
            }
        }

        deserializer.deserialize_seq(SeqVisitor(std::marker::PhantomData))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[f64]) -> BoundSeq<f64> {
        BoundSeq::new(v.to_vec()).unwrap()
    }

    #[test]
    fn product_examples() {
        let s = seq(&[4.0, 5.0, 6.0]);
        assert_eq!(bound_product(&BoundSeq::ones(3), &s).unwrap(), s);
        assert_eq!(bound_product(&BoundSeq::zeros(3), &s).unwrap(), BoundSeq::zeros(3));
        assert_eq!(bound_product(&seq(&[1.0, 2.0, 3.0]), &s).unwrap(), seq(&[4.0, 10.0, 18.0]));
        assert!(bound_product(&seq(&[1.0]), &s).is_err());
    }

    #[test]
    fn zero_times_unbounded_is_zero() {
        let p = bound_product(&BoundSeq::<f64>::zeros(2), &BoundSeq::unbounded(2)).unwrap();
        assert_eq!(p, BoundSeq::zeros(2));
    }

    #[test]
    fn shift_examples() {
        let s = seq(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(shift_levels(&s, 0).unwrap(), s);
        assert_eq!(shift_levels(&s, 1).unwrap(), seq(&[2.0, 3.0, 4.0]));
        assert_eq!(shift_levels(&s, 3).unwrap(), seq(&[4.0]));
        assert_eq!(shift_levels(&s, 4).unwrap_err(), Error::LevelRange { level: 4, max: 3 });
    }

    #[test]
    fn negative_entries_rejected() {
        assert!(BoundSeq::new(vec![1.0, -0.5]).is_err());
        assert!(BoundSeq::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn json_with_inf_sentinel() {
        let s = BoundSeq::<f64>::unit_ball(3, 1).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"["inf",1.0,"inf"]"#);
        let back: BoundSeq<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<BoundSeq<f64>>(r#"[1, -2]"#).is_err());
        assert!(serde_json::from_str::<BoundSeq<f64>>(r#"["huge"]"#).is_err());
    }
}
