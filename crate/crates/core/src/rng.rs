// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Named, seedable, splittable random streams.
//!
//! A run owns one [`StreamFactory`]; every stochastic operation receives an
//! explicit [`RngStream`] derived from it, so a trial can be replayed from
//! `(seed, stream id)` alone regardless of scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RngStream = ChaCha8Rng;

/// Well-known stream ids. Trial `k` of a Monte-Carlo sweep uses
/// `TRIALS_BASE + k`.
pub mod streams {
    pub const TOPOLOGY: u64 = 1;
    pub const SCHEDULE: u64 = 2;
    pub const PROTOCOL: u64 = 3;
    pub const TRIALS_BASE: u64 = 1 << 20;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFactory {
    seed: u64,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, id: u64) -> RngStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }

    pub fn trial(&self, k: u64) -> RngStream {
        self.stream(streams::TRIALS_BASE + k)
    }
}

/// Shorthand for a stream on the default id.
pub fn seeded(seed: u64) -> RngStream {
    StreamFactory::new(seed).stream(0)
}
