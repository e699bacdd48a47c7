#include <algorithm>
#include <array>
#include <numeric>
#include <stdexcept>
#include <string_view>

#include "escape/random.hpp"
#include "escape/scenario.hpp"

namespace escape::scenario {

namespace {

constexpr std::array<std::string_view, 32> kCommonSyscalls{
    "read",      "write",   "open",       "close",    "stat",      "fstat",
    "lstat",     "poll",    "lseek",      "mmap",     "mprotect",  "munmap",
    "brk",       "ioctl",   "pread64",    "pwrite64", "readv",     "writev",
    "access",    "pipe",    "select",     "futex",    "epoll_wait", "accept4",
    "sendto",    "recvfrom", "getpid",    "clone",    "openat",    "getdents64",
    "nanosleep", "fcntl"};

}  // namespace

std::string alphabet_name(std::size_t index) {
  if (index < kCommonSyscalls.size()) {
    return std::string(kCommonSyscalls[index]);
  }
  return "sys_" + std::to_string(index);
}

std::vector<std::string> generate_synthetic_trace(const TraceSpec& spec) {
  if (spec.alphabet_size < 1) {
    throw std::invalid_argument("alphabet size must be >= 1");
  }
  if (spec.injection) {
    const auto& inj = *spec.injection;
    if (inj.offset > spec.length || inj.count > spec.length - inj.offset) {
      throw std::out_of_range("injection [" + std::to_string(inj.offset) + ", " +
                              std::to_string(inj.offset + inj.count) +
                              ") extends beyond trace length " + std::to_string(spec.length));
    }
  }
  auto rng = random::make_engine(spec.seed, 0);

  // The pattern holds every alphabet entry once plus up to alphabet_size extra
  // random entries, shuffled; the trace repeats it.
  const std::size_t a = spec.alphabet_size;
  std::vector<std::size_t> pattern(a);
  std::iota(pattern.begin(), pattern.end(), std::size_t{0});
  const auto extra = random::uniform_index(rng, a + 1);
  for (std::size_t i = 0; i < extra; ++i) {
    pattern.push_back(random::uniform_index(rng, a));
  }
  for (std::size_t i = pattern.size(); i > 1; --i) {
    std::swap(pattern[i - 1], pattern[random::uniform_index(rng, i)]);
  }

  std::vector<std::string> calls;
  calls.reserve(spec.length);
  for (std::size_t i = 0; i < spec.length; ++i) {
    calls.push_back(alphabet_name(pattern[i % pattern.size()]));
  }
  if (spec.injection) {
    for (std::size_t j = 0; j < spec.injection->count; ++j) {
      calls[spec.injection->offset + j] = "novel_" + std::to_string(j);
    }
  }
  return calls;
}

std::string trace_text(const std::vector<std::string>& calls) {
  std::string out;
  for (const auto& c : calls) {
    out += c;
    out += '\n';
  }
  return out;
}

}  // namespace escape::scenario
