//! JSON encoding of exact integers as plain number tokens of any length.

use std::str::FromStr;

use num_bigint::BigUint;
use serde::de::Error as _;
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Number;

pub fn serialize<S: Serializer>(value: &BigUint, serializer: S) -> Result<S::Ok, S::Error> {
    let number = Number::from_str(&value.to_string()).map_err(S::Error::custom)?;
    number.serialize(serializer)
}

pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<BigUint, D::Error> {
    let number = Number::deserialize(deserializer)?;
    BigUint::from_str(&number.to_string()).map_err(D::Error::custom)
}

/// Renders an exact integer as a JSON number token.
pub fn to_value(value: &BigUint) -> serde_json::Value {
    serde_json::Value::Number(Number::from_str(&value.to_string()).expect("decimal digits"))
}
