#pragma once

#include <stdexcept>
#include <string>

namespace deceptor {

// Base for all library errors. Subclasses name the failure condition;
// catch sites dispatch on type, not on message text.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- core_model ----
class MissingPerturbableField : public Error { public: using Error::Error; };
class EmptyText : public Error { public: using Error::Error; };

// ---- provider_gateway ----
class TransportError : public Error { public: using Error::Error; };
class AuthMissing : public Error { public: using Error::Error; };
class MalformedResponse : public Error { public: using Error::Error; };
class ScorerUnsupported : public Error { public: using Error::Error; };

// ---- roles ----
class UnmappableVerdict : public Error { public: using Error::Error; };
class RoleEmptyOutput : public Error { public: using Error::Error; };
class TemplateError : public Error { public: using Error::Error; };

class UnparsableScore : public Error {
public:
    UnparsableScore(const std::string& what, std::string raw_reply)
        : Error(what), raw_(std::move(raw_reply)) {}
    const std::string& raw() const { return raw_; }

private:
    std::string raw_;
};

// ---- defense_suite ----
class EmptyTokenStream : public Error { public: using Error::Error; };
class EmptyCalibration : public Error { public: using Error::Error; };

// ---- corpus_io ----
class IoError : public Error { public: using Error::Error; };
class MissingDefaultReply : public Error { public: using Error::Error; };

class ParseError : public Error {
public:
    ParseError(const std::string& what, long line = -1) : Error(what), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

class SchemaMismatch : public Error {
public:
    SchemaMismatch(const std::string& what, long line = -1) : Error(what), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

class CorruptRecord : public Error {
public:
    CorruptRecord(const std::string& what, long line) : Error(what), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

}  // namespace deceptor
