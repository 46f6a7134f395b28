#include "nntf/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>
#include <vector>

namespace nntf {

namespace {

constexpr std::size_t kMaxEntries = 10'000'000;

[[noreturn]] void fail(const std::string& path, std::size_t line, const std::string& message) {
    throw io_error(path + ":" + std::to_string(line) + ": " + message);
}

// Splits a line into whitespace-separated tokens.
std::vector<std::string_view> tokenize(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r'))
            ++pos;
        std::size_t end = pos;
        while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != '\r')
            ++end;
        if (end > pos)
            tokens.push_back(line.substr(pos, end - pos));
        pos = end;
    }
    return tokens;
}

double parse_double(std::string_view token, const std::string& path, std::size_t line) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        fail(path, line, "expected a decimal number, got '" + std::string(token) + "'");
    return value;
}

std::size_t parse_size(std::string_view token, const std::string& path, std::size_t line) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        fail(path, line, "expected a positive integer, got '" + std::string(token) + "'");
    return value;
}

} // namespace

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

DenseTensor read_tensor_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open tensor file '" + path + "'");

    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line))
        fail(path, 1, "empty file, expected magic 'TNSR 1'");
    ++lineno;
    {
        const auto tokens = tokenize(line);
        if (tokens.size() != 2 || tokens[0] != "TNSR" || tokens[1] != "1")
            fail(path, lineno, "bad magic, expected 'TNSR 1'");
    }

    if (!std::getline(in, line))
        fail(path, 2, "missing shape line");
    ++lineno;
    std::vector<std::size_t> shape;
    {
        const auto tokens = tokenize(line);
        if (tokens.empty())
            fail(path, lineno, "missing mode count");
        const std::size_t order = parse_size(tokens[0], path, lineno);
        if (order == 0)
            fail(path, lineno, "mode count must be >= 1");
        if (tokens.size() != order + 1)
            fail(path, lineno,
                 "expected " + std::to_string(order) + " mode sizes, got " +
                     std::to_string(tokens.size() - 1));
        shape.reserve(order);
        std::size_t volume = 1;
        for (std::size_t n = 0; n < order; ++n) {
            const std::size_t extent = parse_size(tokens[n + 1], path, lineno);
            if (extent == 0)
                fail(path, lineno, "mode sizes must be positive");
            if (volume > kMaxEntries / extent)
                fail(path, lineno,
                     "tensor exceeds the " + std::to_string(kMaxEntries) + "-entry limit");
            volume *= extent;
            shape.push_back(extent);
        }
    }

    std::size_t volume = 1;
    for (std::size_t extent : shape)
        volume *= extent;
    std::vector<double> data;
    data.reserve(volume);
    while (std::getline(in, line)) {
        ++lineno;
        for (const auto token : tokenize(line)) {
            if (data.size() == volume)
                fail(path, lineno, "more values than the shape volume (" +
                                       std::to_string(volume) + ")");
            data.push_back(parse_double(token, path, lineno));
        }
    }
    if (data.size() != volume)
        fail(path, lineno + 1,
             "expected " + std::to_string(volume) + " values, got " + std::to_string(data.size()));
    return DenseTensor(std::move(shape), std::move(data));
}

void write_tensor_file(const std::string& path, const DenseTensor& t) {
    std::ostringstream out;
    out << "TNSR 1\n" << t.order();
    for (std::size_t extent : t.shape())
        out << ' ' << extent;
    out << '\n';
    const std::size_t fiber = t.shape().back();
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << format_double(t[i]);
        out << ((i + 1) % fiber == 0 ? '\n' : ' ');
    }
    write_text_file(path, out.str());
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
    std::ostringstream out;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j)
                out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out)
        throw io_error("failed writing '" + path + "'");
}

} // namespace nntf
