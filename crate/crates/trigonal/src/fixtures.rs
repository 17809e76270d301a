//! Shared, lazily built contexts for the unit tests.

use crate::curve::default_corpus;
use crate::exec::Exec;
use crate::periods::PeriodData;
use crate::sigma::SigmaContext;
use std::sync::OnceLock;

pub fn ctx0() -> &'static SigmaContext {
    static CTX: OnceLock<SigmaContext> = OnceLock::new();
    CTX.get_or_init(|| {
        let p = PeriodData::build(&default_corpus()[0], Exec::Parallel).unwrap();
        SigmaContext::new(p, 1, Exec::Parallel).unwrap()
    })
}
