#include "climbsim/trace_io.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string_view>

namespace climbsim {

namespace {

constexpr std::string_view kCsvHeader = "timestamp,key,size";

template <typename T>
void put_le(char* dst, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
}

template <typename T>
T get_le(const char* src) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<unsigned char>(src[i])) << (8 * i);
    return v;
}

[[noreturn]] void csv_error(TraceErrorKind kind, std::uint64_t line, const std::string& what) {
    throw TraceError(kind, "line " + std::to_string(line) + ": " + what);
}

[[noreturn]] void bin_error(TraceErrorKind kind, std::uint64_t offset, const std::string& what) {
    throw TraceError(kind, "offset " + std::to_string(offset) + ": " + what);
}

std::uint64_t parse_field(std::string_view field, std::uint64_t line, const char* name, std::uint64_t max) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
        csv_error(TraceErrorKind::Malformed, line, std::string("field '") + name + "' is not an unsigned integer");
    if (v > max) csv_error(TraceErrorKind::Malformed, line, std::string("field '") + name + "' is out of range");
    return v;
}

}  // namespace

TraceFormat detect_format(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".csv") return TraceFormat::Csv;
    if (ext == ".bin" || ext == ".cct") return TraceFormat::Binary;
    throw TraceError(TraceErrorKind::UnknownFormat,
                     "cannot infer trace format from '" + path.string() + "' (use .csv, .bin or .cct)");
}

TraceFormat parse_format(const std::string& name) {
    if (name == "csv") return TraceFormat::Csv;
    if (name == "bin" || name == "binary") return TraceFormat::Binary;
    throw TraceError(TraceErrorKind::UnknownFormat, "unknown trace format '" + name + "'");
}

std::optional<RequestRecord> CsvTraceReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_ == 1 && line == kCsvHeader) continue;

        std::string_view rest(line);
        std::array<std::string_view, 3> fields;
        for (std::size_t i = 0; i < 3; ++i) {
            const auto comma = rest.find(',');
            if (i < 2) {
                if (comma == std::string_view::npos) csv_error(TraceErrorKind::Malformed, line_, "missing column");
                fields[i] = rest.substr(0, comma);
                rest.remove_prefix(comma + 1);
            } else {
                if (comma != std::string_view::npos) csv_error(TraceErrorKind::Malformed, line_, "too many columns");
                fields[i] = rest;
            }
        }
        RequestRecord r;
        r.timestamp = parse_field(fields[0], line_, "timestamp", std::numeric_limits<std::uint64_t>::max());
        r.key = parse_field(fields[1], line_, "key", std::numeric_limits<std::uint64_t>::max());
        r.size = static_cast<std::uint32_t>(
            parse_field(fields[2], line_, "size", std::numeric_limits<std::uint32_t>::max()));
        if (r.size == 0) csv_error(TraceErrorKind::ZeroSize, line_, "object size must be at least 1");
        return r;
    }
    if (in_.bad()) throw TraceError(TraceErrorKind::Io, "read error after line " + std::to_string(line_));
    return std::nullopt;
}

BinaryTraceReader::BinaryTraceReader(std::istream& in) : in_(in) {
    std::array<char, kBinaryHeaderSize> header{};
    in_.read(header.data(), header.size());
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got < 4 || std::memcmp(header.data(), kBinaryMagic, 4) != 0)
        bin_error(TraceErrorKind::BadMagic, 0, "bad magic (expected CCT1)");
    if (got < kBinaryHeaderSize) bin_error(TraceErrorKind::Truncated, got, "truncated header");
    const auto version = get_le<std::uint16_t>(header.data() + 4);
    if (version != kBinaryVersion)
        bin_error(TraceErrorKind::VersionMismatch, 4, "unsupported version " + std::to_string(version));
    count_ = get_le<std::uint64_t>(header.data() + 6);
}

std::optional<RequestRecord> BinaryTraceReader::next() {
    const std::uint64_t offset = kBinaryHeaderSize + read_ * kBinaryRecordSize;
    if (read_ == count_) {
        if (!finished_) {
            finished_ = true;
            if (in_.peek() != std::char_traits<char>::eof())
                bin_error(TraceErrorKind::TrailingBytes, offset, "trailing bytes after the last record");
        }
        return std::nullopt;
    }
    std::array<char, kBinaryRecordSize> buf{};
    in_.read(buf.data(), buf.size());
    if (static_cast<std::size_t>(in_.gcount()) < buf.size())
        bin_error(TraceErrorKind::Truncated, offset,
                  "truncated record " + std::to_string(read_) + " of " + std::to_string(count_));
    RequestRecord r;
    r.timestamp = get_le<std::uint32_t>(buf.data());
    r.key = get_le<std::uint64_t>(buf.data() + 4);
    r.size = get_le<std::uint32_t>(buf.data() + 12);
    if (get_le<std::uint32_t>(buf.data() + 16) != 0)
        bin_error(TraceErrorKind::NonzeroReserved, offset + 16, "reserved word is not zero");
    if (r.size == 0) bin_error(TraceErrorKind::ZeroSize, offset + 12, "object size must be at least 1");
    ++read_;
    return r;
}

std::vector<RequestRecord> read_csv_trace(std::istream& in) {
    CsvTraceReader reader(in);
    std::vector<RequestRecord> out;
    while (auto r = reader.next()) out.push_back(*r);
    return out;
}

void write_csv_trace(std::ostream& out, std::span<const RequestRecord> records, bool header) {
    if (header) out << kCsvHeader << '\n';
    for (const auto& r : records) out << r.timestamp << ',' << r.key << ',' << r.size << '\n';
}

std::vector<RequestRecord> read_binary_trace(std::istream& in) {
    BinaryTraceReader reader(in);
    std::vector<RequestRecord> out;
    out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(*reader.size_hint(), 1u << 24)));
    while (auto r = reader.next()) out.push_back(*r);
    return out;
}

void write_binary_trace(std::ostream& out, std::span<const RequestRecord> records) {
    std::array<char, kBinaryHeaderSize> header{};
    std::memcpy(header.data(), kBinaryMagic, 4);
    put_le<std::uint16_t>(header.data() + 4, kBinaryVersion);
    put_le<std::uint64_t>(header.data() + 6, records.size());
    out.write(header.data(), header.size());
    std::array<char, kBinaryRecordSize> buf{};
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.timestamp > std::numeric_limits<std::uint32_t>::max())
            throw TraceError(TraceErrorKind::TimestampRange,
                             "record " + std::to_string(i) + ": timestamp does not fit the 32-bit binary field");
        if (r.size == 0) throw TraceError(TraceErrorKind::ZeroSize, "record " + std::to_string(i) + ": zero size");
        put_le<std::uint32_t>(buf.data(), static_cast<std::uint32_t>(r.timestamp));
        put_le<std::uint64_t>(buf.data() + 4, r.key);
        put_le<std::uint32_t>(buf.data() + 12, r.size);
        put_le<std::uint32_t>(buf.data() + 16, 0);
        out.write(buf.data(), buf.size());
    }
}

namespace {

class FileSource final : public RequestSource {
public:
    FileSource(const std::filesystem::path& path, TraceFormat format)
        : file_(std::make_unique<std::ifstream>(path, std::ios::binary)) {
        if (!*file_) throw TraceError(TraceErrorKind::Io, "cannot open trace '" + path.string() + "'");
        if (format == TraceFormat::Csv) {
            reader_ = std::make_unique<CsvTraceReader>(*file_);
        } else {
            reader_ = std::make_unique<BinaryTraceReader>(*file_);
        }
    }
    std::optional<RequestRecord> next() override { return reader_->next(); }
    std::optional<std::uint64_t> size_hint() const override { return reader_->size_hint(); }

private:
    std::unique_ptr<std::ifstream> file_;
    std::unique_ptr<RequestSource> reader_;
};

}  // namespace

std::unique_ptr<RequestSource> open_trace(const std::filesystem::path& path, TraceFormat format) {
    return std::make_unique<FileSource>(path, format);
}

std::unique_ptr<RequestSource> open_trace(const std::filesystem::path& path) {
    return open_trace(path, detect_format(path));
}

std::vector<RequestRecord> read_trace_file(const std::filesystem::path& path, TraceFormat format) {
    auto source = open_trace(path, format);
    std::vector<RequestRecord> out;
    while (auto r = source->next()) out.push_back(*r);
    return out;
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw TraceError(TraceErrorKind::Io, "cannot write '" + tmp.string() + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw TraceError(TraceErrorKind::Io, "write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw TraceError(TraceErrorKind::Io, "cannot move output into '" + path.string() + "'");
    }
}

void write_trace_file(const std::filesystem::path& path, std::span<const RequestRecord> records, TraceFormat format) {
    std::ostringstream buf(std::ios::binary);
    if (format == TraceFormat::Csv) {
        write_csv_trace(buf, records);
    } else {
        write_binary_trace(buf, records);
    }
    write_file_atomically(path, buf.str());
}

}  // namespace climbsim
