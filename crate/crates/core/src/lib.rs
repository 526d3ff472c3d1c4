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

//! Distributed quantum network simulator.

pub mod cli;
pub mod dense;
pub mod emit;
pub mod error;
pub mod gate;
pub mod ledger;
pub mod network;
pub mod protocol;
pub mod rng;
pub mod scrambling;
pub mod stabilizer;
pub mod trace;

pub use error::{Error, ErrorClass, Result};
