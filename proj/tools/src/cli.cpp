#include "mdms_cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <utility>

namespace mdms::cli {

std::string format_significant(double v, int digits) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, digits);
  if (ec != std::errc()) {
    throw std::runtime_error("number formatting failed");
  }
  return std::string(buf.data(), ptr);
}

std::string format_fixed(double v, int decimals) {
  std::array<char, 400> buf{};
  auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, decimals);
  if (ec != std::errc()) {
    throw std::runtime_error("number formatting failed");
  }
  return std::string(buf.data(), ptr);
}

std::string format_roundtrip(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) {
    throw std::runtime_error("number formatting failed");
  }
  return std::string(buf.data(), ptr);
}

namespace {

bool valid_entry(const LowerBoundMatrixProfile &p, std::size_t i) {
  return p.has_neighbor(i) && std::isfinite(p.values[i]);
}

} // namespace

void write_profile_csv(std::ostream &os, const LowerBoundMatrixProfile &profile) {
  os << "position,value,index,case\n";
  for (std::size_t i = 0; i < profile.size(); ++i) {
    os << i << ',';
    if (valid_entry(profile, i)) {
      os << format_significant(profile.values[i]) << ',' << profile.index[i] << ','
         << case_code(profile.cases[i]);
    } else if (profile.all_missing[i]) {
      os << ",," << case_code(CaseLabel::degenerate_all_missing);
    } else {
      os << ",,";
    }
    os << '\n';
  }
}

void write_motifs_csv(std::ostream &os, const std::vector<MotifPair> &motifs) {
  os << "rank,pos_a,pos_b,distance,case\n";
  for (const auto &mp : motifs) {
    os << mp.rank << ',' << mp.pos_a << ',' << mp.pos_b << ',' << format_fixed(mp.distance) << ','
       << case_code(mp.case_label) << '\n';
  }
}

namespace {

std::vector<std::string> split_lines(const std::string &text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string encode_value(double v) { return is_missing(v) ? std::string() : format_roundtrip(v); }

} // namespace

std::string rewrite_values(const std::string &text, const MissingValueSeries &series,
                           const CsvFormat &format) {
  const auto lines = split_lines(text);
  std::size_t first = 0;
  if (lines.size() == series.size() + 1) {
    first = 1;
  } else if (lines.size() != series.size()) {
    throw InfeasibleError("input has " + std::to_string(lines.size()) + " records, series has " +
                          std::to_string(series.size()));
  }
  std::string out;
  if (first == 1) {
    out += lines[0];
    out += '\n';
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const std::string &line = lines[first + k];
    if (line.find(format.delimiter) == std::string::npos) {
      out += encode_value(series[k]);
      out += '\n';
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(format.delimiter, start);
      fields.push_back(line.substr(start, pos == std::string::npos ? pos : pos - start));
      if (pos == std::string::npos) {
        break;
      }
      start = pos + 1;
    }
    const std::size_t col = format.value_column.value_or(fields.size() - 1);
    fields.at(col) = encode_value(series[k]);
    for (std::size_t f = 0; f < fields.size(); ++f) {
      if (f > 0) {
        out += format.delimiter;
      }
      out += fields[f];
    }
    out += '\n';
  }
  return out;
}

namespace {

// Flag errors detected after CLI11 accepted the command line.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct InputOptions {
  std::string input;
  std::optional<std::size_t> column;
};

struct EngineOptions {
  std::size_t window = 0;
  std::size_t exclusion_div = 4;
  std::string bounds;
  std::string policy = "zero";
  unsigned threads = 1;
};

void add_input(CLI::App &cmd, InputOptions &o) {
  cmd.add_option("--input", o.input, "series file, one record per line")->required();
  cmd.add_option("--column", o.column, "0-based value column (default: last field)");
}

void add_engine(CLI::App &cmd, EngineOptions &o) {
  cmd.add_option("--window", o.window, "motif length m")->required();
  cmd.add_option("--exclusion-div", o.exclusion_div, "exclusion half-width is m / N")
      ->capture_default_str();
  cmd.add_option("--bounds", o.bounds, "LO,HI value range for missing entries");
  cmd.add_option("--all-missing-policy", o.policy, "zero | flag")
      ->check(CLI::IsMember({"zero", "flag"}))
      ->capture_default_str();
  cmd.add_option("--threads", o.threads, "worker threads")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
}

CsvFormat csv_format(const InputOptions &o) {
  CsvFormat f;
  f.value_column = o.column;
  return f;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw UsageError("cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MissingValueSeries load_series(const std::string &path, const CsvFormat &format) {
  return parse_series(read_file(path), format);
}

double parse_double(std::string_view s, const char *what) {
  while (!s.empty() && s.front() == ' ') {
    s.remove_prefix(1);
  }
  while (!s.empty() && s.back() == ' ') {
    s.remove_suffix(1);
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw UsageError(std::string("bad ") + what + ": '" + std::string(s) + "'");
  }
  return v;
}

EngineConfig engine_config(const EngineOptions &o) {
  EngineConfig c;
  c.m = o.window;
  c.exclusion_divisor = o.exclusion_div;
  c.all_missing_policy =
      o.policy == "flag" ? AllMissingPolicy::flag_invalid : AllMissingPolicy::bound_zero;
  if (!o.bounds.empty()) {
    const auto comma = o.bounds.find(',');
    if (comma == std::string::npos) {
      throw UsageError("--bounds expects LO,HI");
    }
    const std::string_view text(o.bounds);
    const double lo = parse_double(text.substr(0, comma), "--bounds");
    const double hi = parse_double(text.substr(comma + 1), "--bounds");
    if (lo > hi) {
      throw UsageError("--bounds needs LO <= HI");
    }
    c.value_bounds_override = std::make_pair(lo, hi);
  }
  return c;
}

// Opens path for writing, or hands back the fallback stream when path is empty.
class Sink {
public:
  Sink(const std::string &path, std::ostream &fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) {
        throw UsageError("cannot write " + path);
      }
      stream_ = &file_;
    }
  }
  std::ostream &operator*() { return *stream_; }

  void close() {
    stream_->flush();
    if (!*stream_) {
      throw std::runtime_error("write failed");
    }
  }

private:
  std::ofstream file_;
  std::ostream *stream_;
};

struct ProfileCmd {
  InputOptions in;
  EngineOptions engine;
  std::string output;
};

int cmd_profile(const ProfileCmd &o, std::ostream &out) {
  const auto series = load_series(o.in.input, csv_format(o.in));
  const auto profile = mdms::mdms(series, engine_config(o.engine), o.engine.threads);
  Sink sink(o.output, out);
  write_profile_csv(*sink, profile);
  sink.close();
  return kOk;
}

struct MotifsCmd {
  InputOptions in;
  EngineOptions engine;
  std::size_t top_k = 1;
  std::string output;
  std::string output_motifs;
};

int cmd_motifs(const MotifsCmd &o, std::ostream &out) {
  const auto series = load_series(o.in.input, csv_format(o.in));
  const auto profile = mdms::mdms(series, engine_config(o.engine), o.engine.threads);
  if (!o.output.empty()) {
    Sink sink(o.output, out);
    write_profile_csv(*sink, profile);
    sink.close();
  }
  Sink sink(o.output_motifs, out);
  write_motifs_csv(*sink, top_k_motifs(profile, o.top_k));
  sink.close();
  return kOk;
}

struct CompareCmd {
  InputOptions in;
  EngineOptions engine;
  std::string oracle;
  std::string mode = "both";
  std::string output;
  std::string summary;
  std::optional<std::size_t> query;
  std::size_t query_top = 3;
};

std::string motif_text(const LowerBoundMatrixProfile &p) {
  const auto top = top_k_motifs(p, 1);
  if (top.empty()) {
    return "";
  }
  return std::to_string(top[0].pos_a) + "," + std::to_string(top[0].pos_b) + "," +
         format_fixed(top[0].distance);
}

std::size_t violations(const LowerBoundMatrixProfile &p, const LowerBoundMatrixProfile &oracle) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (valid_entry(p, i) && valid_entry(oracle, i) && p.values[i] > oracle.values[i] + 1e-9) {
      ++count;
    }
  }
  return count;
}

// Closest windows to `q` under a pair distance, outside the exclusion zone,
// ordered by (distance, position).
template <class Dist>
std::string neighbors_text(std::size_t len, std::size_t q, std::size_t w, std::size_t top,
                           Dist dist) {
  std::vector<std::pair<double, std::size_t>> cands;
  for (std::size_t j = 0; j < len; ++j) {
    if ((j > q ? j - q : q - j) <= w) {
      continue;
    }
    const double d = dist(j);
    if (std::isfinite(d)) {
      cands.emplace_back(std::sqrt(std::max(d, 0.0)), j);
    }
  }
  std::sort(cands.begin(), cands.end());
  std::string s;
  for (std::size_t k = 0; k < std::min(top, cands.size()); ++k) {
    if (k > 0) {
      s += ' ';
    }
    s += std::to_string(cands[k].second) + ":" + format_fixed(cands[k].first);
  }
  return s;
}

int cmd_compare(const CompareCmd &o, std::ostream &out) {
  const auto series = load_series(o.in.input, csv_format(o.in));
  const auto cfg = engine_config(o.engine);
  const bool want_mdms = o.mode != "impute-linear";
  const bool want_impute = o.mode != "mdms";

  std::optional<MissingValueSeries> oracle;
  if (!o.oracle.empty()) {
    oracle = load_series(o.oracle, csv_format(o.in));
    if (oracle->size() != series.size()) {
      throw InfeasibleError("oracle has " + std::to_string(oracle->size()) + " values, input has " +
                            std::to_string(series.size()));
    }
    if (!oracle->complete()) {
      throw InfeasibleError("oracle series must not contain missing values");
    }
  }
  if (o.query && *o.query + cfg.m > series.size()) {
    throw InfeasibleError("--query position has no full window");
  }

  const auto imputed = want_impute ? std::optional(linear_impute(series)) : std::nullopt;
  std::optional<LowerBoundMatrixProfile> p_mdms, p_impute, p_oracle;
  if (want_mdms) {
    p_mdms = mdms::mdms(series, cfg, o.engine.threads);
  }
  if (want_impute) {
    p_impute = mdms::mdms(*imputed, cfg, o.engine.threads);
  }
  if (oracle) {
    p_oracle = mdms::mdms(*oracle, cfg, o.engine.threads);
  }

  const std::size_t len = series.size() - cfg.m + 1;
  if (!o.output.empty()) {
    Sink sink(o.output, out);
    auto &os = *sink;
    os << "position";
    auto header = [&os](const char *name) {
      os << ',' << name << "_value," << name << "_index," << name << "_case";
    };
    if (p_mdms) {
      header("mdms");
    }
    if (p_impute) {
      header("impute");
    }
    if (p_oracle) {
      header("oracle");
    }
    os << '\n';
    auto cells = [&os](const LowerBoundMatrixProfile &p, std::size_t i) {
      if (valid_entry(p, i)) {
        os << ',' << format_significant(p.values[i]) << ',' << p.index[i] << ','
           << case_code(p.cases[i]);
      } else {
        os << ",,," << (p.all_missing[i] ? case_code(CaseLabel::degenerate_all_missing) : "");
      }
    };
    for (std::size_t i = 0; i < len; ++i) {
      os << i;
      for (const auto *p : {&p_mdms, &p_impute, &p_oracle}) {
        if (*p) {
          cells(**p, i);
        }
      }
      os << '\n';
    }
    sink.close();
  }

  Sink sink(o.summary, out);
  auto &os = *sink;
  if (p_mdms && p_impute) {
    double sum = 0.0;
    double worst = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < len; ++i) {
      if (valid_entry(*p_mdms, i) && valid_entry(*p_impute, i)) {
        const double d = std::abs(p_mdms->values[i] - p_impute->values[i]);
        sum += d;
        worst = std::max(worst, d);
        ++count;
      }
    }
    os << "compared_positions=" << count << '\n';
    os << "mean_abs_diff=" << format_significant(count ? sum / static_cast<double>(count) : 0.0)
       << '\n';
    os << "max_abs_diff=" << format_significant(worst) << '\n';
  }
  if (p_mdms) {
    os << "mdms_top1=" << motif_text(*p_mdms) << '\n';
  }
  if (p_impute) {
    os << "impute_top1=" << motif_text(*p_impute) << '\n';
  }
  if (p_oracle) {
    os << "oracle_top1=" << motif_text(*p_oracle) << '\n';
    if (p_mdms) {
      os << "mdms_violations=" << violations(*p_mdms, *p_oracle) << '\n';
    }
    if (p_impute) {
      os << "impute_violations=" << violations(*p_impute, *p_oracle) << '\n';
    }
  }
  if (o.query) {
    const std::size_t q = *o.query;
    const std::size_t w = cfg.exclusion_half_width();
    if (p_mdms) {
      os << "mdms_query_neighbors="
         << neighbors_text(len, q, w, o.query_top,
                           [&](std::size_t j) {
                             return pair_lb_sqdist(series.window(q, cfg.m),
                                                   series.window(j, cfg.m), cfg)
                                 .sq;
                           })
         << '\n';
    }
    if (imputed) {
      os << "impute_query_neighbors="
         << neighbors_text(len, q, w, o.query_top,
                           [&](std::size_t j) {
                             return znorm_sqdist(imputed->window(q, cfg.m),
                                                 imputed->window(j, cfg.m), cfg.epsilon);
                           })
         << '\n';
    }
  }
  sink.close();
  return kOk;
}

struct MaskCmd {
  InputOptions in;
  std::string mode = "random";
  std::optional<std::size_t> count;
  std::optional<double> fraction;
  std::size_t block_len = 0;
  std::optional<std::size_t> at;
  std::uint64_t seed = 0;
  std::string output;
};

int cmd_mask(const MaskCmd &o, std::ostream &out) {
  if (o.count && o.fraction) {
    throw UsageError("--count and --fraction are mutually exclusive");
  }
  const auto format = csv_format(o.in);
  const std::string text = read_file(o.in.input);
  const auto series = parse_series(text, format);

  MaskSpec spec;
  spec.count = o.count;
  spec.fraction = o.fraction;
  spec.block_length = o.block_len;
  spec.target = o.at;
  spec.seed = o.seed;
  if (o.mode == "random") {
    spec.mode = MaskMode::random_points;
  } else if (o.mode == "blocks" || (o.mode == "block" && !o.at)) {
    spec.mode = MaskMode::uniform_blocks;
  } else {
    spec.mode = MaskMode::targeted_block;
  }
  const auto masked = apply_mask(series, spec);
  Sink sink(o.output, out);
  *sink << rewrite_values(text, masked, format);
  sink.close();
  return kOk;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Motif search on time series with missing values", "mdms"};
  app.require_subcommand(1);

  ProfileCmd profile;
  auto *c_profile = app.add_subcommand("profile", "lower-bound matrix profile as CSV");
  add_input(*c_profile, profile.in);
  add_engine(*c_profile, profile.engine);
  c_profile->add_option("--output", profile.output, "profile CSV path (default: stdout)");

  MotifsCmd motifs;
  auto *c_motifs = app.add_subcommand("motifs", "ranked motif pairs");
  add_input(*c_motifs, motifs.in);
  add_engine(*c_motifs, motifs.engine);
  c_motifs->add_option("--top-k", motifs.top_k, "number of pairs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_motifs->add_option("--output", motifs.output, "also write the profile CSV here");
  c_motifs->add_option("--output-motifs", motifs.output_motifs,
                       "motif CSV path (default: stdout)");

  CompareCmd compare;
  auto *c_compare =
      app.add_subcommand("compare", "missing-aware profile against linear imputation");
  add_input(*c_compare, compare.in);
  add_engine(*c_compare, compare.engine);
  c_compare->add_option("--oracle", compare.oracle, "complete series before masking");
  c_compare->add_option("--mode", compare.mode, "both | mdms | impute-linear")
      ->check(CLI::IsMember({"both", "mdms", "impute-linear"}))
      ->capture_default_str();
  c_compare->add_option("--output", compare.output, "side-by-side profile CSV");
  c_compare->add_option("--summary", compare.summary, "summary path (default: stdout)");
  c_compare->add_option("--query", compare.query, "also list the nearest windows of this one");
  c_compare->add_option("--query-top", compare.query_top, "neighbors listed for --query")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  MaskCmd mask;
  auto *c_mask = app.add_subcommand("mask", "hide values for stress tests");
  add_input(*c_mask, mask.in);
  c_mask->add_option("--mode", mask.mode, "random | blocks | block (with --at: one block)")
      ->check(CLI::IsMember({"random", "blocks", "block", "targeted"}))
      ->capture_default_str();
  c_mask->add_option("--count", mask.count, "points (random) or blocks (blocks)");
  c_mask->add_option("--fraction", mask.fraction, "share of the series to hide");
  c_mask->add_option("--block-len", mask.block_len, "block length p");
  c_mask->add_option("--at", mask.at, "center of a single block");
  c_mask->add_option("--seed", mask.seed, "random seed")->capture_default_str();
  c_mask->add_option("--output", mask.output, "masked series path (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (c_profile->parsed()) {
      return cmd_profile(profile, out);
    }
    if (c_motifs->parsed()) {
      return cmd_motifs(motifs, out);
    }
    if (c_compare->parsed()) {
      return cmd_compare(compare, out);
    }
    return cmd_mask(mask, out);
  } catch (const UsageError &e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError &e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const LengthError &e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InfeasibleError &e) {
    err << "error: " << e.what() << '\n';
    return kInfeasible;
  }
}

} // namespace mdms::cli
