#include "whitham/io.hpp"

#include <openssl/sha.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace whitham::io {
namespace {

std::string grid_line(const Grid1D& g) {
  return "# grid length=" + format_real(g.length()) + " points=" + std::to_string(g.points()) + "\n";
}

}  // namespace

std::string format_real(Real v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, static_cast<double>(v));
  return std::string(buf, res.ptr);
}

void write_field_csv(const std::filesystem::path& path, const RealField& f) {
  std::string out = grid_line(f.grid()) + "x,value\n";
  for (std::size_t j = 0; j < f.size(); ++j) out += format_real(f.grid().coordinate(j)) + "," + format_real(f[j]) + "\n";
  write_text(path, out);
}

void write_field_csv(const std::filesystem::path& path, const ComplexField& f) {
  std::string out = grid_line(f.grid()) + "x,re,im\n";
  for (std::size_t j = 0; j < f.size(); ++j) {
    out += format_real(f.grid().coordinate(j)) + "," + format_real(f[j].real()) + "," + format_real(f[j].imag()) + "\n";
  }
  write_text(path, out);
}

RealField read_field_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  double length = 0;
  std::size_t points = 0;
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "# grid length=%lf points=%zu", &length, &points) != 2) {
    throw std::runtime_error(path.string() + ": missing grid comment line");
  }
  std::getline(in, line);  // header row
  std::vector<Real> values;
  values.reserve(points);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    values.push_back(std::stold(line.substr(comma + 1)));
  }
  if (values.size() != points) {
    throw std::runtime_error(path.string() + ": expected " + std::to_string(points) + " rows, found " +
                             std::to_string(values.size()));
  }
  return RealField(Grid1D(length, points), std::move(values));
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string content_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
  std::ostringstream hex;
  for (unsigned char c : digest) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(c);
  return hex.str();
}

}  // namespace whitham::io
