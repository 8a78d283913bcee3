#include "hwt/fixture.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "hwt/error.hpp"

namespace hwt {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) tokens.push_back(tok);
  return tokens;
}

std::size_t parse_size(const std::string& tok, std::size_t line_no) {
  std::size_t value = 0;
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError(fmt::format("fixture line {}: expected a non-negative integer, got '{}'",
                                 line_no, tok));
  return value;
}

double parse_double(const std::string& tok, std::size_t line_no) {
  // strtod gives correctly rounded conversion, which the round trip relies on.
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size())
    throw ParseError(fmt::format("fixture line {}: expected a number, got '{}'", line_no, tok));
  return v;
}

bool next_line(std::istream& is, std::string& line, std::size_t& line_no) {
  if (!std::getline(is, line)) return false;
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

void write_fixture(std::ostream& os, const DenseTensor& t) {
  const auto& s = t.shape();
  os << s.row_order() << ' ' << s.col_order() << '\n';
  for (std::size_t k = 0; k < s.row_order(); ++k) os << (k ? " " : "") << s.row_dims()[k];
  os << '\n';
  for (std::size_t k = 0; k < s.col_order(); ++k) os << (k ? " " : "") << s.col_dims()[k];
  os << '\n';
  for (const auto& z : t.entries()) os << fmt::format("{:.17g} {:.17g}\n", z.real(), z.imag());
}

DenseTensor read_fixture(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(is, line, line_no)) throw ParseError("fixture: empty input");
  const auto header = split_ws(line);
  if (header.size() != 2) throw ParseError("fixture line 1: expected 'M N'");
  const std::size_t m = parse_size(header[0], line_no);
  const std::size_t n = parse_size(header[1], line_no);

  auto read_dims = [&](std::size_t order) {
    if (!next_line(is, line, line_no))
      throw ParseError(fmt::format("fixture line {}: missing dimension line", line_no + 1));
    const auto toks = split_ws(line);
    if (toks.size() != order)
      throw ParseError(fmt::format("fixture line {}: expected {} dimensions, got {}", line_no,
                                   order, toks.size()));
    Dims dims;
    for (const auto& tok : toks) dims.push_back(parse_size(tok, line_no));
    return dims;
  };
  Dims rows = read_dims(m);
  Dims cols = read_dims(n);

  std::optional<TensorShape> shape;
  try {
    shape.emplace(std::move(rows), std::move(cols));
  } catch (const ShapeError& e) {
    throw ParseError(std::string("fixture: invalid shape: ") + e.what());
  }

  std::vector<Complex> entries;
  entries.reserve(shape->size());
  while (entries.size() < shape->size()) {
    if (!next_line(is, line, line_no))
      throw ParseError(fmt::format("fixture: expected {} entries, found {}", shape->size(),
                                   entries.size()));
    const auto toks = split_ws(line);
    if (toks.size() != 2)
      throw ParseError(fmt::format("fixture line {}: expected 're im'", line_no));
    entries.emplace_back(parse_double(toks[0], line_no), parse_double(toks[1], line_no));
  }
  while (next_line(is, line, line_no))
    if (!split_ws(line).empty())
      throw ParseError(fmt::format("fixture line {}: trailing data after entries", line_no));

  try {
    return DenseTensor(std::move(*shape), std::move(entries));
  } catch (const DomainError& e) {
    throw ParseError(std::string("fixture: ") + e.what());
  }
}

void save_fixture(const std::filesystem::path& path, const DenseTensor& t) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_fixture(os, t);
}

DenseTensor load_fixture(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open fixture " + path.string());
  try {
    return read_fixture(is);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string to_fixture_string(const DenseTensor& t) {
  std::ostringstream os;
  write_fixture(os, t);
  return os.str();
}

DenseTensor from_fixture_string(const std::string& text) {
  std::istringstream is(text);
  return read_fixture(is);
}

}  // namespace hwt
