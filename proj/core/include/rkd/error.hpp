// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace rkd {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Input lies outside the domain of an operation (empty matrix, N too small, label out of range).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid scalar parameter (temperature, step size, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Misuse of stateful objects, e.g. a second backward pass without reset.
class StateError : public Error {
public:
    using Error::Error;
};

/// Inconsistent or incomplete training/model configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed, truncated or mismatched file contents.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Training diverged (non-finite loss).
class TrainingError : public Error {
public:
    using Error::Error;
};

} // namespace rkd
