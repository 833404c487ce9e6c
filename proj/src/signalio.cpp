#include "airlfd/signalio.hpp"

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace airlfd::signalio {

namespace {

std::string_view trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  return text;
}

bool parse_double(std::string_view cell, double& value) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

std::vector<std::string_view> split_cells(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

}  // namespace

FeatureMode FeatureMode::parse(const std::string& text) {
  if (text == "raw") return {FeatureKind::Raw, 1};
  if (text == "stats") return {FeatureKind::Stats, 1};
  if (text.rfind("decimate(", 0) == 0 && text.back() == ')') {
    const std::string inner = text.substr(9, text.size() - 10);
    int factor = 0;
    auto [ptr, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), factor);
    if (ec == std::errc{} && ptr == inner.data() + inner.size() && factor >= 1)
      return {FeatureKind::Decimate, factor};
  }
  fail(ErrorCode::BadMode, "unknown feature mode '" + text + "' (expected raw, stats, or decimate(k))");
}

std::string FeatureMode::str() const {
  switch (kind) {
    case FeatureKind::Raw: return "raw";
    case FeatureKind::Stats: return "stats";
    case FeatureKind::Decimate: return "decimate(" + std::to_string(factor) + ")";
  }
  return "raw";
}

int FeatureMode::state_dim(int win_len) const {
  switch (kind) {
    case FeatureKind::Raw: return win_len;
    case FeatureKind::Stats: return 7;
    case FeatureKind::Decimate: return win_len / factor;
  }
  return win_len;
}

Recording load_recording(const std::string& path, int channel, int trajectory_id) {
  std::ifstream file(path);
  if (!file) fail(ErrorCode::MissingFile, "cannot open '" + path + "'");
  if (channel < 0) fail(ErrorCode::BadColumn, "channel must be >= 0");

  std::vector<double> samples;
  std::vector<std::string_view> cells;
  std::string line;
  long line_no = 0;
  bool first_content_row = true;
  while (std::getline(file, line)) {
    ++line_no;
    std::string_view stripped = trim(line);
    if (stripped.empty()) continue;
    split_cells(stripped, cells);
    if (first_content_row) {
      // A single leading non-numeric row is a header.
      double probe = 0.0;
      bool numeric = true;
      for (const auto& cell : cells)
        if (!parse_double(cell, probe)) { numeric = false; break; }
      first_content_row = false;
      if (!numeric) continue;
    }
    if (channel >= static_cast<int>(cells.size()))
      fail(ErrorCode::BadColumn, path + ": line " + std::to_string(line_no) + " has " +
                                     std::to_string(cells.size()) + " columns, channel " +
                                     std::to_string(channel) + " requested");
    double value = 0.0;
    if (!parse_double(cells[channel], value))
      fail(ErrorCode::ParseError, path + ": line " + std::to_string(line_no) +
                                      ": non-numeric cell '" + std::string(cells[channel]) + "'");
    if (!std::isfinite(value))
      fail(ErrorCode::ParseError, path + ": line " + std::to_string(line_no) + ": non-finite sample");
    samples.push_back(value);
  }
  if (samples.empty()) fail(ErrorCode::EmptyInput, path + ": no samples");

  Recording rec;
  rec.trajectory_id = trajectory_id;
  rec.channel_id = channel;
  rec.samples = Eigen::Map<const VectorXd>(samples.data(), static_cast<Eigen::Index>(samples.size()));
  return rec;
}

Normalizer fit_normalizer(const std::vector<Recording>& healthy) {
  long total = 0;
  for (const auto& rec : healthy) total += rec.samples.size();
  if (total < 2) fail(ErrorCode::EmptyInput, "normalizer needs at least 2 samples");

  double sum = 0.0;
  for (const auto& rec : healthy) sum += rec.samples.sum();
  const double mean = sum / static_cast<double>(total);
  double sq = 0.0;
  for (const auto& rec : healthy) sq += (rec.samples.array() - mean).square().sum();
  const double var = sq / static_cast<double>(total);
  const double stdev = std::sqrt(var);
  if (stdev <= 1e-12 * std::max(1.0, std::abs(mean)))
    fail(ErrorCode::DegenerateSignal, "healthy signal has zero variance");
  return {mean, stdev};
}

std::vector<FeatureVec> normalize_and_window(const Recording& rec, const Normalizer& norm,
                                             const FeatureConfig& cfg) {
  if (cfg.win_len < 8) fail(ErrorCode::BadConfig, "win_len must be >= 8");
  if (cfg.stride < 1) fail(ErrorCode::BadConfig, "stride must be >= 1");
  if (cfg.mode.kind == FeatureKind::Decimate) {
    if (cfg.mode.factor < 1 || cfg.win_len % cfg.mode.factor != 0)
      fail(ErrorCode::BadMode, "decimate factor must be >= 1 and divide win_len");
  }
  const long n = rec.samples.size();
  if (n < cfg.win_len)
    fail(ErrorCode::TooShort, "recording " + std::to_string(rec.trajectory_id) + " has " +
                                  std::to_string(n) + " samples, win_len is " +
                                  std::to_string(cfg.win_len));

  const long count = (n - cfg.win_len) / cfg.stride + 1;
  std::vector<FeatureVec> windows;
  windows.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) {
    const VectorXd z =
        (rec.samples.segment(k * cfg.stride, cfg.win_len).array() - norm.mean) / norm.std;
    switch (cfg.mode.kind) {
      case FeatureKind::Raw:
        windows.push_back(z);
        break;
      case FeatureKind::Decimate: {
        const int d = cfg.win_len / cfg.mode.factor;
        FeatureVec v(d);
        for (int j = 0; j < d; ++j) v(j) = z(static_cast<long>(j) * cfg.mode.factor);
        windows.push_back(std::move(v));
        break;
      }
      case FeatureKind::Stats:
        windows.push_back(window_stats(z));
        break;
    }
  }
  return windows;
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MissingFile, "cannot open manifest " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, "manifest " + path + ": " + e.what());
  }
  RunManifest m;
  try {
    m.files = doc.at("files").get<std::vector<std::string>>();
    m.channel = doc.at("channel").get<int>();
    const auto& range = doc.at("healthy_range");
    m.healthy_lo = range.at(0).get<int>();
    m.healthy_hi = range.at(1).get<int>();
    const auto& onset = doc.at("onset_true");
    m.onset_true = onset.is_null() ? -1 : onset.get<int>();
    if (doc.contains("config_digest")) m.config_digest = doc["config_digest"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadFormat, "manifest " + path + ": " + e.what());
  }
  if (m.files.empty()) fail(ErrorCode::EmptyInput, "manifest " + path + " lists no files");
  if (m.healthy_lo < 0 || m.healthy_hi < m.healthy_lo ||
      m.healthy_hi >= static_cast<int>(m.files.size()))
    fail(ErrorCode::BadFormat, "manifest " + path + ": bad healthy_range");
  return m;
}

void save_manifest(const RunManifest& manifest, const std::string& path) {
  nlohmann::json doc;
  doc["files"] = manifest.files;
  doc["channel"] = manifest.channel;
  doc["healthy_range"] = {manifest.healthy_lo, manifest.healthy_hi};
  if (manifest.has_onset())
    doc["onset_true"] = manifest.onset_true;
  else
    doc["onset_true"] = nullptr;
  if (!manifest.config_digest.empty()) doc["config_digest"] = manifest.config_digest;
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write manifest " + path);
  out << doc.dump(2) << '\n';
  if (!out) fail(ErrorCode::IoError, "short write on manifest " + path);
}

TransitionSet build_transitions(const std::vector<WindowedTrajectory>& trajectories) {
  TransitionSet set;
  for (const auto& traj : trajectories) {
    if (traj.windows.size() < 2)
      fail(ErrorCode::TooFewWindows, "trajectory " + std::to_string(traj.trajectory_id) +
                                         " has " + std::to_string(traj.windows.size()) +
                                         " windows, need at least 2");
    const std::size_t begin = set.transitions.size();
    for (std::size_t k = 0; k + 1 < traj.windows.size(); ++k) {
      Transition t;
      t.s = traj.windows[k];
      t.a = traj.windows[k + 1];
      t.s_next = traj.windows[k + 1];
      t.trajectory_id = traj.trajectory_id;
      set.transitions.push_back(std::move(t));
    }
    set.trajectory_ids.push_back(traj.trajectory_id);
    set.spans.emplace_back(begin, set.transitions.size());
  }
  return set;
}

}  // namespace airlfd::signalio
