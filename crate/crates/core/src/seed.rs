use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Run seed. Every random draw in the toolkit comes from a stream derived
/// from a seed and a label, so unrelated features never share a stream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Independent PRNG stream keyed by `(seed, label)`.
    pub fn stream(self, label: &str) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(self.0.to_le_bytes());
        h.update([0u8]);
        h.update(label.as_bytes());
        let digest: [u8; 32] = h.finalize().into();
        ChaCha8Rng::from_seed(digest)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}
