#pragma once

#include <stdexcept>
#include <string>

namespace weaver {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::string file, int line, std::string message)
        : Error(file + ":" + std::to_string(line) + ": syntax error: " + message),
          file_(std::move(file)), line_(line), message_(std::move(message)) {}

    const std::string& file() const noexcept { return file_; }
    int line() const noexcept { return line_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string file_;
    int line_;
    std::string message_;
};

class UnsupportedConstruct : public Error {
public:
    UnsupportedConstruct(std::string file, int line, std::string construct)
        : Error(file + ":" + std::to_string(line) + ": unsupported construct: " + construct),
          file_(std::move(file)), line_(line), construct_(std::move(construct)) {}

    const std::string& file() const noexcept { return file_; }
    int line() const noexcept { return line_; }
    const std::string& construct() const noexcept { return construct_; }

private:
    std::string file_;
    int line_;
    std::string construct_;
};

class UnknownLine : public Error {
public:
    UnknownLine(const std::string& file, int line)
        : Error(file + ":" + std::to_string(line) + ": not an executable line"), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

class RenderError : public Error {
public:
    using Error::Error;
};

class TraceFormatError : public Error {
public:
    TraceFormatError(std::string position, std::string reason)
        : Error("trace format error at " + position + ": " + reason),
          position_(std::move(position)), reason_(std::move(reason)) {}

    const std::string& position() const noexcept { return position_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::string position_;
    std::string reason_;
};

class UniverseMismatch : public Error {
public:
    using Error::Error;
};

class LineMismatch : public Error {
public:
    using Error::Error;
};

class BudgetExhausted : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    using Error::Error;
};

class EndpointError : public Error {
public:
    EndpointError(int status, std::string body)
        : Error("endpoint returned status " + std::to_string(status) + ": " + body),
          status_(status), body_(std::move(body)) {}

    int status() const noexcept { return status_; }
    const std::string& body() const noexcept { return body_; }

private:
    int status_;
    std::string body_;
};

class ShimUnavailable : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class BucketError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace weaver
