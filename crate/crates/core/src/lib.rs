//! Hard instances for contraction-based flow sparsifiers and quality-gap
//! certificates.
//!
//! The pipeline builds a random regular expander, performs capacity surgery
//! around a terminal set, harvests far-apart vertex pairs that a given
//! partition brings close together, and turns them into a terminal demand.
//! A [`GapCertificate`] then compares a distance-based congestion lower bound
//! in `G` against an explicit routing in the contracted graph `H`.

pub mod certificate;
pub mod clustering;
pub mod congestion;
pub mod demand;
pub mod error;
pub mod expander;
pub mod graph;
pub mod io;
pub mod pipeline;
pub mod routing;
pub mod surgery;

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub use certificate::{certify_gap, convex_combine, ConvexCombination, GapCertificate, GluedGraph};
pub use error::{Error, Result};
pub use graph::{CapacitatedGraph, ContractedGraph, Demand, Partition};

/// Exact rational used for every demand and congestion value.
pub type Rational = num_rational::BigRational;

/// `num/den` in lowest terms; integers keep an explicit `/1`.
pub fn ratio_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `num/den` or a bare integer. Zero denominators are rejected.
pub fn parse_ratio(s: &str) -> Option<Rational> {
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim().parse::<BigInt>().ok()?, b.trim().parse::<BigInt>().ok()?),
        None => (s.trim().parse::<BigInt>().ok()?, BigInt::one()),
    };
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

pub(crate) fn rat(n: u128) -> Rational {
    Rational::from_integer(BigInt::from(n))
}
