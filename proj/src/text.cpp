#include "escape/text.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace escape::text {

namespace {

std::string printf_double(const char* fmt, double value) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof(buf), fmt, value);
  return std::string(buf, static_cast<std::size_t>(n));
}

template <class T>
T parse_integral(std::string_view s, std::string_view what) {
  const auto body = trim(s);
  T value{};
  const auto* first = body.data();
  const auto* last = body.data() + body.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (body.empty() || ec != std::errc{} || ptr != last) {
    throw std::invalid_argument("invalid integer for " + std::string(what) +
                                ": '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

std::string format_real(double value) { return printf_double("%.12g", value); }

std::string format_csv(double value) { return printf_double("%.10g", value); }

std::string_view trim(std::string_view s) {
  constexpr std::string_view kSpace = " \t\r\n\f\v";
  const auto begin = s.find_first_not_of(kSpace);
  if (begin == std::string_view::npos) {
    return {};
  }
  const auto end = s.find_last_not_of(kSpace);
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(s.substr(start));
      break;
    }
    parts.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

double parse_real(std::string_view s, std::string_view what) {
  // strtod rather than from_chars<double>: the latter is missing on older
  // libstdc++ releases.
  const std::string body(trim(s));
  if (body.empty()) {
    throw std::invalid_argument("missing number for " + std::string(what));
  }
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(body.c_str(), &end);
  if (end != body.c_str() + body.size() || errno == ERANGE) {
    throw std::invalid_argument("invalid number for " + std::string(what) +
                                ": '" + body + "'");
  }
  return value;
}

long long parse_int(std::string_view s, std::string_view what) {
  return parse_integral<long long>(s, what);
}

unsigned long long parse_u64(std::string_view s, std::string_view what) {
  return parse_integral<unsigned long long>(s, what);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw std::runtime_error("read error on '" + path.string() + "'");
  }
  return std::move(buf).str();
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open '" + path.string() +
                               "' for writing");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw std::runtime_error("write error on '" + path.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw std::runtime_error("cannot move output into place at '" +
                             path.string() + "': " + ec.message());
  }
}

}  // namespace escape::text
