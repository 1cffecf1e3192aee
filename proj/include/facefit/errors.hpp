// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace facefit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Array shapes or counts do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented precondition (range, finiteness, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Binary/text codec failures. The kind distinguishes the cause.
class FormatError : public Error {
 public:
  enum class Kind { MalformedHeader, TruncatedPayload, ChecksumMismatch, BadValue, Io };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Point sets too degenerate for a closed-form solve.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// An operation produced nothing (e.g. a crop that keeps no vertex).
class EmptyResult : public Error {
 public:
  using Error::Error;
};

/// A metric is mathematically undefined for the given input.
class UndefinedResult : public Error {
 public:
  using Error::Error;
};

/// An objective evaluated to a non-finite value.
class Diverged : public Error {
 public:
  using Error::Error;
};

}  // namespace facefit
