pub mod arith;
pub mod characters;
pub mod error;
pub mod functionals;
pub mod harness;
pub mod oracles;
pub mod quadrature;
pub mod randmodel;
pub mod testfn;
pub mod zetafn;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/characters.md")]
    mod characters {}
    #[doc = include_str!("../../../book/src/random-model.md")]
    mod random_model {}
    #[doc = include_str!("../../../book/src/test-functions.md")]
    mod test_functions {}
    #[doc = include_str!("../../../book/src/zeta.md")]
    mod zeta {}
    #[doc = include_str!("../../../book/src/functionals.md")]
    mod functionals {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/analytic.md")]
    mod analytic {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/config-reference.md")]
    mod config_reference {}
}
