/*
 * Copyright 2026 The Atomcode Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace atomcode {

/// Base class for all atomcode errors. Subclasses name the failure domain;
/// the CLI maps them to exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// -- file / schema -----------------------------------------------------------

class IoError : public Error {
public:
    using Error::Error;
};

/// Structurally broken input (missing header, ragged CSV row, bad JSON line).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Input parsed but violates the data model (no data column, bad column name).
class SchemaError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class DuplicateRunError : public Error {
public:
    using Error::Error;
};

/// Stored content no longer matches its recorded hash.
class IntegrityError : public Error {
public:
    using Error::Error;
};

// -- segmentation / templating -----------------------------------------------

class EmptyDocumentError : public Error {
public:
    using Error::Error;
};

class MissingFieldError : public Error {
public:
    using Error::Error;
};

class EmptyDataError : public Error {
public:
    using Error::Error;
};

// -- provider ------------------------------------------------------------------

/// 401/403 from the endpoint, or a required key variable that is unset.
class AuthError : public Error {
public:
    using Error::Error;
};

class RateLimitedError : public Error {
public:
    using Error::Error;
};

class ServerError : public Error {
public:
    using Error::Error;
};

class NetworkError : public Error {
public:
    using Error::Error;
};

class MalformedResponseError : public Error {
public:
    using Error::Error;
};

/// Non-retryable HTTP failure outside the named categories (e.g. 400, 404).
class RequestError : public Error {
public:
    using Error::Error;
};

class RetriesExhaustedError : public Error {
public:
    using Error::Error;
};

/// Operation does not apply to this provider kind (e.g. wire encoding a mock).
class NotApplicableError : public Error {
public:
    using Error::Error;
};

// -- engine ---------------------------------------------------------------------

class StaleCheckpointError : public Error {
public:
    using Error::Error;
};

/// Another run holds the advisory lock on this table.
class LockError : public Error {
public:
    using Error::Error;
};

// -- irr ------------------------------------------------------------------------

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// A count-kind rating cell that is not an integer.
class TypeError : public Error {
public:
    using Error::Error;
};

}  // namespace atomcode
