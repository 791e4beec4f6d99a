#include "cvqec/textio.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace cvqec {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k > 0) {
      out += ' ';
    }
    out += format_double(values[k]);
  }
  return out;
}

double parse_double(std::string_view token) {
  const std::string t = trim(token);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') {
    ++first;
  }
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc{} || ptr != last) {
    throw std::invalid_argument("not a number: '" + t + "'");
  }
  return v;
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) {
    out.push_back(parse_double(tok));
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
    ++b;
  }
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
    --e;
  }
  return std::string(s.substr(b, e - b));
}

std::string strip_comment(std::string_view s) {
  const auto pos = s.find('#');
  return std::string(pos == std::string_view::npos ? s : s.substr(0, pos));
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

AtomicFileSet::~AtomicFileSet() {
  std::error_code ec;
  for (const auto& tmp : temporaries_) {
    std::filesystem::remove(tmp, ec);
  }
}

void AtomicFileSet::add(const std::filesystem::path& path, std::string contents) {
  pending_.push_back({path, std::move(contents)});
}

void AtomicFileSet::commit() {
  for (const Pending& p : pending_) {
    std::filesystem::path tmp = p.target;
    tmp += ".tmp";
    temporaries_.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(p.contents.data(), static_cast<std::streamsize>(p.contents.size()));
    out.close();
    if (!out) {
      throw std::runtime_error("cannot write " + p.target.string());
    }
  }
  for (std::size_t k = 0; k < pending_.size(); ++k) {
    std::error_code ec;
    std::filesystem::rename(temporaries_[k], pending_[k].target, ec);
    if (ec) {
      throw std::runtime_error("cannot rename into " + pending_[k].target.string() + ": " + ec.message());
    }
  }
  temporaries_.clear();
  pending_.clear();
}

std::vector<std::string> AtomicFileSet::paths() const {
  std::vector<std::string> out;
  for (const Pending& p : pending_) {
    out.push_back(p.target.string());
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace cvqec
