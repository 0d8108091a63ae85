//! Fresh resource identifiers of the form `<base>r-<uuid-v4>`.

use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sparql_rest::Term;
use uuid::Builder;

#[derive(Debug)]
enum Source {
    Os,
    Seeded(Mutex<ChaCha20Rng>),
}

#[derive(Debug)]
pub struct IdMinter {
    base: String,
    source: Source,
}

impl IdMinter {
    pub fn random(base: impl Into<String>) -> IdMinter {
        IdMinter { base: base.into(), source: Source::Os }
    }

    /// Reproducible sequence; two minters with the same seed mint the same ids.
    pub fn seeded(base: impl Into<String>, seed: u64) -> IdMinter {
        IdMinter { base: base.into(), source: Source::Seeded(Mutex::new(ChaCha20Rng::seed_from_u64(seed))) }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn mint(&self) -> Term {
        let bytes: [u8; 16] = match &self.source {
            Source::Os => rand::random(),
            Source::Seeded(rng) => rng.lock().expect("minter lock poisoned").random(),
        };
        let uuid = Builder::from_random_bytes(bytes).into_uuid();
        Term::iri(format!("{}r-{}", self.base, uuid.hyphenated()))
    }
}
