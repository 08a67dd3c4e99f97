// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{name} must be a non-negative finite number, got {value}")]
pub struct PowerError {
    pub name: &'static str,
    pub value: f64,
}

/// Switching power `C * V^2 * f` in watts, for capacitance in farads,
/// supply in volts and clock in hertz.
pub fn dynamic_power(capacitance: f64, volts: f64, hertz: f64) -> Result<f64, PowerError> {
    for (name, value) in [
        ("capacitance", capacitance),
        ("voltage", volts),
        ("frequency", hertz),
    ] {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(PowerError { name, value });
        }
    }
    Ok(capacitance * volts * volts * hertz)
}
