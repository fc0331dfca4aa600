#pragma once

// Trace formats.
//
// CSV: UTF-8 lines "timestamp,key,size", LF or CRLF, optional first line
// "timestamp,key,size". Size must be >= 1.
//
// Binary (all little-endian):
//   header  : "CCT1" | u16 version = 1 | u64 record count       (14 bytes)
//   record  : u32 timestamp | u64 key | u32 size | u32 reserved (20 bytes)
// Readers reject a bad magic, an unknown version, truncated records, a
// nonzero reserved word and bytes past the last record.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "climbsim/core.hpp"

namespace climbsim {

enum class TraceErrorKind {
    Io,
    Malformed,
    ZeroSize,
    BadMagic,
    VersionMismatch,
    Truncated,
    NonzeroReserved,
    TrailingBytes,
    TimestampRange,
    UnknownFormat,
};

class TraceError : public std::runtime_error {
public:
    TraceError(TraceErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    TraceErrorKind kind() const { return kind_; }

private:
    TraceErrorKind kind_;
};

inline constexpr char kBinaryMagic[4] = {'C', 'C', 'T', '1'};
inline constexpr std::uint16_t kBinaryVersion = 1;
inline constexpr std::size_t kBinaryHeaderSize = 14;
inline constexpr std::size_t kBinaryRecordSize = 20;

enum class TraceFormat { Csv, Binary };

// By extension: .csv, or .bin / .cct.
TraceFormat detect_format(const std::filesystem::path& path);
TraceFormat parse_format(const std::string& name);

class CsvTraceReader final : public RequestSource {
public:
    explicit CsvTraceReader(std::istream& in) : in_(in) {}
    std::optional<RequestRecord> next() override;

private:
    std::istream& in_;
    std::uint64_t line_ = 0;
};

class BinaryTraceReader final : public RequestSource {
public:
    // Reads and checks the header immediately.
    explicit BinaryTraceReader(std::istream& in);
    std::optional<RequestRecord> next() override;
    std::optional<std::uint64_t> size_hint() const override { return count_; }

private:
    std::istream& in_;
    std::uint64_t count_ = 0;
    std::uint64_t read_ = 0;
    bool finished_ = false;
};

std::vector<RequestRecord> read_csv_trace(std::istream& in);
void write_csv_trace(std::ostream& out, std::span<const RequestRecord> records, bool header = true);

std::vector<RequestRecord> read_binary_trace(std::istream& in);
void write_binary_trace(std::ostream& out, std::span<const RequestRecord> records);

// Owns the underlying file stream.
std::unique_ptr<RequestSource> open_trace(const std::filesystem::path& path, TraceFormat format);
std::unique_ptr<RequestSource> open_trace(const std::filesystem::path& path);

std::vector<RequestRecord> read_trace_file(const std::filesystem::path& path, TraceFormat format);

// Writes to a sibling temporary file and renames it into place.
void write_trace_file(const std::filesystem::path& path, std::span<const RequestRecord> records, TraceFormat format);

// Same write-then-rename for arbitrary text or bytes.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace climbsim
