//! Frobenius-side invariants of polynomial ideals over prime fields (Fedder
//! tests, ν-values, F-pure threshold intervals), exact-rational linear
//! programs over term exponents (Newton-polyhedron thresholds), a mod-p sweep
//! comparing the two, and the Frobenius action on the top cohomology of
//! Fermat hypersurfaces.

pub mod arith;
pub mod correspondence;
pub mod fermat;
pub mod frobenius;
pub mod input;
pub mod newton_lp;
pub mod poly;

pub use poly::{
    parse_poly, parse_qpoly, BracketBound, CoefficientDomain, ExponentVector, FpPoly, PolyError,
    PrimeField, QPoly, Rationals, SparsePolynomial,
};
