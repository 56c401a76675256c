#include "sepcov/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string_view>

#include "sepcov/errors.hpp"

namespace sepcov {
namespace {

constexpr std::array<char, 4> kMagic = {'F', 'D', 'S', '1'};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    fields.push_back(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view v) {
  while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
  while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) v.remove_suffix(1);
  return v;
}

double parse_double(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError("line " + std::to_string(line) + ": cannot parse '" + std::string(field) +
                         "' as a number",
                     line);
  }
  if (!std::isfinite(v)) {
    throw ParseError("line " + std::to_string(line) + ": non-finite value", line);
  }
  return v;
}

std::size_t parse_count(std::string_view field, std::size_t line) {
  field = trim(field);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError("line " + std::to_string(line) + ": cannot parse '" + std::string(field) +
                         "' as a count",
                     line);
  }
  return v;
}

std::vector<double> parse_row(const std::string& text, std::size_t expected, std::size_t line,
                              const char* what) {
  const auto fields = split_fields(text);
  if (fields.size() != expected) {
    throw ParseError("line " + std::to_string(line) + ": " + what + " has " +
                         std::to_string(fields.size()) + " values, expected " +
                         std::to_string(expected),
                     line);
  }
  std::vector<double> out(expected);
  for (std::size_t k = 0; k < expected; ++k) out[k] = parse_double(fields[k], line);
  return out;
}

AxisGrid axis_from_coordinates(std::vector<double> coords, std::size_t location, bool csv) {
  try {
    return AxisGrid(std::move(coords));
  } catch (const DomainError& e) {
    throw ParseError(std::string(csv ? "line " : "offset ") + std::to_string(location) + ": " +
                         e.what(),
                     location);
  }
}

FunctionalSample read_csv(std::istream& in) {
  std::string text;
  std::size_t line = 0;
  auto next = [&](const char* what) {
    while (std::getline(in, text)) {
      ++line;
      if (!trim(text).empty()) return;
    }
    throw ParseError("line " + std::to_string(line + 1) + ": missing " + what, line + 1);
  };

  next("header");
  const auto header = split_fields(text);
  if (header.size() != 3) throw ParseError("line 1: header must be S,T,N", line);
  const std::size_t s = parse_count(header[0], line);
  const std::size_t t = parse_count(header[1], line);
  const std::size_t n = parse_count(header[2], line);
  if (s == 0 || t == 0 || n == 0) throw ParseError("line 1: S, T and N must be positive", line);

  next("spatial coordinates");
  AxisGrid spatial = axis_from_coordinates(parse_row(text, s, line, "spatial coordinates"), line, true);
  next("temporal coordinates");
  AxisGrid temporal =
      axis_from_coordinates(parse_row(text, t, line, "temporal coordinates"), line, true);

  const std::size_t p = s * t;
  RowMatrix data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t k = 0; k < n; ++k) {
    next("observation row");
    const auto row = parse_row(text, p, line, "observation row");
    for (std::size_t j = 0; j < p; ++j)
      data(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = row[j];
  }
  while (std::getline(in, text)) {
    ++line;
    if (!trim(text).empty()) {
      throw ParseError("line " + std::to_string(line) + ": unexpected data after " +
                           std::to_string(n) + " observations",
                       line);
    }
  }
  return FunctionalSample(ProductGrid(std::move(spatial), std::move(temporal)), std::move(data));
}

class ByteReader {
 public:
  explicit ByteReader(std::istream& in) : in_(in) {}

  std::uint64_t u64(const char* what) {
    std::array<unsigned char, 8> b{};
    read(b.data(), b.size(), what);
    std::uint64_t v = 0;
    for (int k = 7; k >= 0; --k) v = (v << 8) | b[static_cast<std::size_t>(k)];
    return v;
  }
  double f64(const char* what) {
    const std::size_t at = offset_;
    const double v = std::bit_cast<double>(u64(what));
    if (!std::isfinite(v)) throw ParseError("offset " + std::to_string(at) + ": non-finite value", at);
    return v;
  }
  void read(unsigned char* dst, std::size_t count, const char* what) {
    in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in_.gcount()) != count) {
      throw ParseError("offset " + std::to_string(offset_) + ": truncated file while reading " +
                           what,
                       offset_);
    }
    offset_ += count;
  }
  std::size_t offset() const { return offset_; }

 private:
  std::istream& in_;
  std::size_t offset_ = 0;
};

FunctionalSample read_bin(std::istream& in) {
  ByteReader r(in);
  std::array<unsigned char, 4> magic{};
  r.read(magic.data(), magic.size(), "magic");
  for (std::size_t k = 0; k < 4; ++k) {
    if (magic[k] != static_cast<unsigned char>(kMagic[k])) throw ParseError("offset 0: bad magic, expected FDS1", 0);
  }
  const std::uint64_t s = r.u64("S");
  const std::uint64_t t = r.u64("T");
  const std::uint64_t n = r.u64("N");
  if (s == 0 || t == 0 || n == 0) throw ParseError("offset 4: S, T and N must be positive", 4);
  if (s > (1u << 24) || t > (1u << 24) || n > (1u << 30)) {
    throw ParseError("offset 4: implausible dimensions", 4);
  }
  std::vector<double> sc(s), tc(t);
  const std::size_t spatial_at = r.offset();
  for (auto& v : sc) v = r.f64("spatial coordinates");
  const std::size_t temporal_at = r.offset();
  for (auto& v : tc) v = r.f64("temporal coordinates");
  AxisGrid spatial = axis_from_coordinates(std::move(sc), spatial_at, false);
  AxisGrid temporal = axis_from_coordinates(std::move(tc), temporal_at, false);
  const std::size_t p = s * t;
  RowMatrix data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < p; ++j)
      data(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = r.f64("observations");
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("offset " + std::to_string(r.offset()) + ": trailing bytes after payload",
                     r.offset());
  }
  return FunctionalSample(ProductGrid(std::move(spatial), std::move(temporal)), std::move(data));
}

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (std::size_t k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xFF);
  out.write(b.data(), 8);
}

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string shortest(double v) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_csv_row(std::ostream& out, const double* values, std::size_t count) {
  for (std::size_t k = 0; k < count; ++k) {
    if (k) out << ',';
    out << format17(values[k]);
  }
  out << '\n';
}

}  // namespace

SampleFormat format_from_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos) {
    std::string ext = path.substr(dot + 1);
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == "csv") return SampleFormat::Csv;
  }
  return SampleFormat::Bin;
}

FunctionalSample read_sample(std::istream& in, SampleFormat format) {
  return format == SampleFormat::Csv ? read_csv(in) : read_bin(in);
}

FunctionalSample read_sample(const std::string& path, SampleFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return read_sample(in, format);
}

FunctionalSample read_sample(const std::string& path) {
  return read_sample(path, format_from_path(path));
}

void write_sample(std::ostream& out, const FunctionalSample& sample, SampleFormat format) {
  const auto& g = sample.grid();
  const std::size_t p = g.size();
  if (format == SampleFormat::Csv) {
    out << g.spatial_size() << ',' << g.temporal_size() << ',' << sample.size() << '\n';
    write_csv_row(out, g.spatial.points().data(), g.spatial_size());
    write_csv_row(out, g.temporal.points().data(), g.temporal_size());
    for (std::size_t n = 0; n < sample.size(); ++n)
      write_csv_row(out, sample.data().row(static_cast<Eigen::Index>(n)).data(), p);
    return;
  }
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, g.spatial_size());
  put_u64(out, g.temporal_size());
  put_u64(out, sample.size());
  for (double v : g.spatial.points()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  for (double v : g.temporal.points()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  for (std::size_t n = 0; n < sample.size(); ++n)
    for (std::size_t j = 0; j < p; ++j)
      put_u64(out, std::bit_cast<std::uint64_t>(
                       sample.data()(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j))));
}

void write_sample(const std::string& path, const FunctionalSample& sample, SampleFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_sample(out, sample, format);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

nlohmann::json report_to_json(const TestReport& report) {
  using nlohmann::json;
  const auto& st = report.statistic;
  json spca = nullptr;
  if (report.spca) {
    spca = {{"lambda1", report.spca->lambda1},
            {"lambda2", report.spca->lambda2},
            {"gap", report.spca->gap},
            {"sign1", report.spca->sign1},
            {"sign2", report.spca->sign2}};
  }
  const auto& cfg = report.config;
  return json{
      {"statistic",
       {{"sup_dev", st.sup_dev},
        {"scaled", st.scaled},
        {"argmax", {st.argmax[0], st.argmax[1], st.argmax[2], st.argmax[3]}}}},
      {"boot_values", report.boot_values},
      {"quantile", report.quantile},
      {"p_value", report.p_value},
      {"reject", report.reject},
      {"regenerated_replicates", report.regenerated_replicates},
      {"spca", spca},
      {"sample", {{"N", report.sample_size}, {"S", report.spatial_points}, {"T", report.temporal_points}}},
      {"config",
       {{"approx", cfg.kind.name()},
        {"psi", cfg.kind.psi ? json(cfg.kind.psi_label) : json(nullptr)},
        {"replicates", cfg.replicates},
        {"block_length", cfg.block_length},
        {"alpha", cfg.alpha},
        {"seed", cfg.seed}}},
      {"wall_time_s", report.wall_time_s},
  };
}

nlohmann::json experiment_to_json(const ExperimentResult& result) {
  using nlohmann::json;
  const auto& c = result.config;
  json decisions = json::array();
  json errors = json::array();
  for (std::size_t k = 0; k < result.runs.size(); ++k) {
    const auto& r = result.runs[k];
    decisions.push_back(r.error ? json(nullptr) : json(r.reject));
    if (r.error) errors.push_back({{"run", k}, {"error", *r.error}});
  }
  return json{
      {"rejection_rate", result.rejection_rate},
      {"failures", result.failures},
      {"decisions", decisions},
      {"errors", errors},
      {"config",
       {{"a", c.params.a},
        {"b", c.params.b},
        {"c", c.params.c},
        {"S", c.spatial},
        {"T", c.temporal},
        {"N", c.sample_size},
        {"runs", c.runs},
        {"paper_grid", c.paper_grid},
        {"ma1_integer_sites", c.sites == Ma1Sites::Integer},
        {"approx", c.bootstrap.kind.name()},
        {"replicates", c.bootstrap.replicates},
        {"block_length", c.bootstrap.block_length},
        {"alpha", c.bootstrap.alpha},
        {"seed", c.seed}}},
      {"wall_time_s", result.wall_time_s},
  };
}

void write_table_header(std::ostream& out) { out << "S,N,c,rejection_rate,runs,r,l,seed\n"; }

void write_table_row(std::ostream& out, const ExperimentResult& result) {
  const auto& c = result.config;
  out << c.spatial << ',' << c.sample_size << ',' << c.params.c << ','
      << shortest(result.rejection_rate) << ',' << c.runs << ',' << c.bootstrap.replicates << ','
      << c.bootstrap.block_length << ',' << c.seed << '\n';
}

}  // namespace sepcov
