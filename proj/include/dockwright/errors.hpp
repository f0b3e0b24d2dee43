// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#pragma once

#include <stdexcept>
#include <string>

namespace dockwright {

// Bad input or a violated precondition. Maps to exit status 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable/unwritable files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing engine, bad config file, unusable environment.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Remote endpoint unreachable or timed out. Callers may retry.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Remote endpoint answered with something we cannot use.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A repair solution could not be compiled against a document.
class ApplicationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dockwright
