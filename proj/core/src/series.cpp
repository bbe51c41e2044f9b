#include "mdms/series.hpp"

#include "mdms/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <deque>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mdms {

MissingValueSeries::MissingValueSeries(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw LengthError("a series needs at least 2 values, got " + std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (std::isinf(v)) {
      throw std::invalid_argument("infinite value in series");
    }
  }
}

std::size_t MissingValueSeries::missing_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](double v) { return is_missing(v); }));
}

bool operator==(const MissingValueSeries &a, const MissingValueSeries &b) {
  if (a.size() != b.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.missing(i) != b.missing(i)) {
      return false;
    }
    if (!a.missing(i) && a[i] != b[i]) {
      return false;
    }
  }
  return true;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

bool is_missing_token(std::string_view token) {
  if (token.empty()) {
    return true;
  }
  if (token.size() != 3) {
    return false;
  }
  return std::tolower(static_cast<unsigned char>(token[0])) == 'n' &&
         std::tolower(static_cast<unsigned char>(token[1])) == 'a' &&
         std::tolower(static_cast<unsigned char>(token[2])) == 'n';
}

enum class TokenKind { missing, number, non_finite, garbage };

TokenKind classify(std::string_view token, double &out) {
  if (is_missing_token(token)) {
    out = kMissing;
    return TokenKind::missing;
  }
  std::string_view body = token;
  if (body.front() == '+') {
    body.remove_prefix(1);
  }
  const char *first = body.data();
  const char *last = body.data() + body.size();
  auto [ptr, ec] = std::from_chars(first, last, out, std::chars_format::general);
  if (ec == std::errc::result_out_of_range) {
    return TokenKind::non_finite;
  }
  if (ec != std::errc() || ptr != last) {
    return TokenKind::garbage;
  }
  if (!std::isfinite(out)) {
    return TokenKind::non_finite;
  }
  return TokenKind::number;
}

std::string_view select_field(std::string_view line, const CsvFormat &format, std::size_t line_no) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(format.delimiter, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  if (!format.value_column) {
    return trim(fields.back());
  }
  if (*format.value_column >= fields.size()) {
    throw ParseError(line_no, "record has " + std::to_string(fields.size()) +
                                  " fields, value column " +
                                  std::to_string(*format.value_column) + " requested");
  }
  return trim(fields[*format.value_column]);
}

} // namespace

MissingValueSeries parse_series(std::istream &in, const CsvFormat &format) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') {
      view.remove_suffix(1);
    }
    const auto token = select_field(view, format, line_no);
    double v = 0.0;
    switch (classify(token, v)) {
    case TokenKind::missing:
    case TokenKind::number:
      values.push_back(v);
      break;
    case TokenKind::non_finite:
      throw ParseError(line_no, "non-finite value '" + std::string(token) + "'");
    case TokenKind::garbage:
      if (line_no == 1) {
        continue; // header row
      }
      throw ParseError(line_no, "not a number: '" + std::string(token) + "'");
    }
  }
  if (values.size() < 2) {
    throw LengthError("a series needs at least 2 records, got " + std::to_string(values.size()));
  }
  return MissingValueSeries(std::move(values));
}

MissingValueSeries parse_series(std::string_view text, const CsvFormat &format) {
  std::istringstream in{std::string(text)};
  return parse_series(in, format);
}

AuxiliarySeries build_auxiliary(const MissingValueSeries &series) {
  const std::size_t n = series.size();
  AuxiliarySeries aux;
  aux.z.resize(n);
  aux.x.resize(n);
  aux.bind.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (series.missing(i)) {
      aux.z[i] = 0.0;
      aux.x[i] = 0.0;
      aux.bind[i] = 0.0;
    } else {
      aux.z[i] = series[i];
      aux.x[i] = series[i] * series[i];
      aux.bind[i] = 1.0;
    }
  }
  return aux;
}

namespace {

// Prefix sums carried as an unevaluated (hi, lo) pair via TwoSum.
struct CompensatedPrefix {
  std::vector<double> hi, lo;

  explicit CompensatedPrefix(std::size_t n) : hi(n + 1, 0.0), lo(n + 1, 0.0) {}

  void push(std::size_t k, double v) {
    const double a = hi[k];
    const double s = a + v;
    const double bb = s - a;
    const double err = (a - (s - bb)) + (v - bb);
    hi[k + 1] = s;
    lo[k + 1] = lo[k] + err;
  }

  double range(std::size_t begin, std::size_t end) const {
    return (hi[end] - hi[begin]) + (lo[end] - lo[begin]);
  }
};

} // namespace

MeanStd sliding_mean_std(std::span<const double> values, std::size_t m) {
  const std::size_t n = values.size();
  if (m == 0 || m > n) {
    throw InfeasibleError("window length " + std::to_string(m) + " does not fit " +
                          std::to_string(n) + " values");
  }
  // Shift by the first value so constant inputs produce exact zeros and the
  // squared sums stay small.
  const double shift = values[0];
  CompensatedPrefix s1(n), s2(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double d = values[k] - shift;
    s1.push(k, d);
    s2.push(k, d * d);
  }
  const std::size_t len = n - m + 1;
  const double inv_m = 1.0 / static_cast<double>(m);
  MeanStd out;
  out.means.resize(len);
  out.stds.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    const double mean = s1.range(i, i + m) * inv_m;
    const double var = s2.range(i, i + m) * inv_m - mean * mean;
    out.means[i] = shift + mean;
    out.stds[i] = var > 0.0 ? std::sqrt(var) : 0.0;
  }
  return out;
}

Extrema sliding_extrema(const MissingValueSeries &series, std::size_t m) {
  const std::size_t n = series.size();
  if (m == 0 || m > n) {
    throw InfeasibleError("window length " + std::to_string(m) + " does not fit " +
                          std::to_string(n) + " values");
  }
  const std::size_t len = n - m + 1;
  Extrema out;
  out.vmax.assign(len, kMissing);
  out.vmin.assign(len, kMissing);
  std::deque<std::size_t> maxq, minq;
  for (std::size_t k = 0; k < n; ++k) {
    if (!series.missing(k)) {
      const double v = series[k];
      while (!maxq.empty() && series[maxq.back()] <= v) {
        maxq.pop_back();
      }
      maxq.push_back(k);
      while (!minq.empty() && series[minq.back()] >= v) {
        minq.pop_back();
      }
      minq.push_back(k);
    }
    if (k + 1 < m) {
      continue;
    }
    const std::size_t start = k + 1 - m;
    while (!maxq.empty() && maxq.front() < start) {
      maxq.pop_front();
    }
    while (!minq.empty() && minq.front() < start) {
      minq.pop_front();
    }
    if (!maxq.empty()) {
      out.vmax[start] = series[maxq.front()];
      out.vmin[start] = series[minq.front()];
    }
  }
  return out;
}

WindowStats compute_window_stats(const MissingValueSeries &series, const AuxiliarySeries &aux,
                                 std::size_t m) {
  WindowStats stats;
  stats.m = m;
  auto z = sliding_mean_std(aux.z, m);
  auto b = sliding_mean_std(aux.bind, m);
  stats.mu_z = std::move(z.means);
  stats.sigma_z = std::move(z.stds);
  stats.sigma_b = std::move(b.stds);

  const std::size_t len = stats.mu_z.size();
  stats.present.resize(len);
  stats.mu_b.resize(len);
  std::uint32_t count = 0;
  for (std::size_t k = 0; k < m; ++k) {
    count += aux.bind[k] != 0.0 ? 1 : 0;
  }
  for (std::size_t i = 0; i < len; ++i) {
    if (i > 0) {
      count -= aux.bind[i - 1] != 0.0 ? 1 : 0;
      count += aux.bind[i + m - 1] != 0.0 ? 1 : 0;
    }
    stats.present[i] = count;
    stats.mu_b[i] = static_cast<double>(count) / static_cast<double>(m);
  }

  auto ext = sliding_extrema(series, m);
  stats.vmax = std::move(ext.vmax);
  stats.vmin = std::move(ext.vmin);
  return stats;
}

void validate(const EngineConfig &config, std::size_t n) {
  if (config.m < 3) {
    throw InfeasibleError("window length must be at least 3, got " + std::to_string(config.m));
  }
  if (config.m > n / 2) {
    throw InfeasibleError("window length " + std::to_string(config.m) +
                          " exceeds half the series length " + std::to_string(n));
  }
  if (config.exclusion_divisor == 0) {
    throw InfeasibleError("exclusion divisor must be positive");
  }
  if (!(config.epsilon >= 0.0)) {
    throw InfeasibleError("epsilon must be nonnegative");
  }
  if (config.value_bounds_override) {
    const auto [lo, hi] = *config.value_bounds_override;
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
      throw InfeasibleError("value bounds must be finite with low <= high");
    }
  }
}

} // namespace mdms
