// Copyright 2026 The evalkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evalkit {

// Root of every error raised by the library. Callers that only care about
// "something in the harness failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define EVALKIT_DEFINE_ERROR(Name)                 \
  class Name : public Error {                      \
   public:                                         \
    using Error::Error;                            \
  }

// corpus
EVALKIT_DEFINE_ERROR(MalformedRow);
EVALKIT_DEFINE_ERROR(AnswerOutOfRange);
EVALKIT_DEFINE_ERROR(DuplicateChoice);
EVALKIT_DEFINE_ERROR(UnknownSchema);
EVALKIT_DEFINE_ERROR(PoolTooLarge);

// prompting
EVALKIT_DEFINE_ERROR(TooManyChoices);
EVALKIT_DEFINE_ERROR(EmptyQuestion);
EVALKIT_DEFINE_ERROR(InsufficientPool);
EVALKIT_DEFINE_ERROR(EmptyChoices);
EVALKIT_DEFINE_ERROR(TemplateError);

// gateway / mock
EVALKIT_DEFINE_ERROR(TransportError);
EVALKIT_DEFINE_ERROR(ProtocolError);
EVALKIT_DEFINE_ERROR(PortInUse);

// postproc
EVALKIT_DEFINE_ERROR(UnknownRuleId);

// metrics
EVALKIT_DEFINE_ERROR(InvalidCounts);
EVALKIT_DEFINE_ERROR(LengthMismatch);
EVALKIT_DEFINE_ERROR(EmptyInput);
EVALKIT_DEFINE_ERROR(ZeroTokenCount);
EVALKIT_DEFINE_ERROR(JudgeUnavailable);
EVALKIT_DEFINE_ERROR(UnparseableVerdict);
EVALKIT_DEFINE_ERROR(UnknownMetric);

// runner
EVALKIT_DEFINE_ERROR(EndpointDown);
EVALKIT_DEFINE_ERROR(TaskLoadError);
EVALKIT_DEFINE_ERROR(CorruptCache);
EVALKIT_DEFINE_ERROR(ConfigMismatch);
EVALKIT_DEFINE_ERROR(EmptyRecords);
EVALKIT_DEFINE_ERROR(MissingMetric);
EVALKIT_DEFINE_ERROR(HarnessFailure);

#undef EVALKIT_DEFINE_ERROR

// Source line is 1-based; 0 means "not tied to a line".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::size_t line, std::string invariant)
      : Error("line " + std::to_string(line) + ": " + invariant),
        line_(line),
        invariant_(std::move(invariant)) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::size_t line_;
  std::string invariant_;
};

class BackendError : public Error {
 public:
  BackendError(int status, std::string body)
      : Error("backend returned HTTP " + std::to_string(status) + ": " + body),
        status_(status),
        body_(std::move(body)) {}
  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

}  // namespace evalkit
