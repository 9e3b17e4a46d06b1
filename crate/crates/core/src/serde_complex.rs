//! Serialize complex numbers as `{re, im}` objects.

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
struct ReIm {
    re: f64,
    im: f64,
}

pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    let mut st = s.serialize_struct("Complex", 2)?;
    st.serialize_field("re", &z.re)?;
    st.serialize_field("im", &z.im)?;
    st.end()
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
    let v = ReIm::deserialize(d)?;
    Ok(Complex64::new(v.re, v.im))
}

/// `[Complex64; 3]` as a list of `{re, im}` objects.
pub mod vec3 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex64; 3], s: S) -> Result<S::Ok, S::Error> {
        let items: Vec<ReIm> = v.iter().map(|z| ReIm { re: z.re, im: z.im }).collect();
        items.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Complex64; 3], D::Error> {
        let v = <[ReIm; 3]>::deserialize(d)?;
        Ok(v.map(|z| Complex64::new(z.re, z.im)))
    }
}
