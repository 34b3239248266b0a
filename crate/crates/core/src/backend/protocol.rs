//! Wire format spoken with a remote model server.
//!
//! All requests are `POST` with a UTF-8 JSON body:
//!
//! | path          | request                                  | response                               |
//! |---------------|------------------------------------------|----------------------------------------|
//! | `/verbalise`  | `{"subject","predicate","object"}`       | `{"verbalisation"}`                    |
//! | `/relevance`  | `{"claim","passages":[..]}`              | `{"scores":[..]}`                      |
//! | `/stance`     | `{"claim","evidence":[..]}`              | `{"distributions":[[s,r,n],..]}`       |

use serde::{Deserialize, Serialize};

pub const VERBALISE_PATH: &str = "verbalise";
pub const RELEVANCE_PATH: &str = "relevance";
pub const STANCE_PATH: &str = "stance";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerbaliseRequest {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerbaliseResponse {
    pub verbalisation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceRequest {
    pub claim: String,
    pub passages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceResponse {
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StanceRequest {
    pub claim: String,
    pub evidence: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StanceResponse {
    pub distributions: Vec<Vec<f64>>,
}
