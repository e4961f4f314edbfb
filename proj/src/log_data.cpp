#include "bidopt/log_data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "bidopt/ctr_model.hpp"

namespace bidopt {

namespace {

bool parse_int(std::string_view token, int& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

// One canonical line: `<click> <price> <idx>:1 <idx>:1 ...`.
bool parse_line(std::string_view line, const ParseOptions& opts, LogRecord& rec) {
  rec.features.clear();
  std::size_t pos = 0;
  int field = 0;
  while (pos < line.size()) {
    std::size_t next = line.find(' ', pos);
    if (next == std::string_view::npos) next = line.size();
    std::string_view token = line.substr(pos, next - pos);
    pos = next + 1;
    if (token.empty()) continue;

    if (field == 0) {
      int click = -1;
      if (!parse_int(token, click) || (click != 0 && click != 1)) return false;
      rec.click = click;
    } else if (field == 1) {
      int price = -1;
      if (!parse_int(token, price) || price < 0) return false;
      if (opts.delta_max > 0 && price > opts.delta_max) price = opts.delta_max;
      rec.market_price = price;
    } else {
      std::size_t colon = token.find(':');
      if (colon == std::string_view::npos || token.substr(colon + 1) != "1") return false;
      int idx = -1;
      if (!parse_int(token.substr(0, colon), idx) || idx < 0) return false;
      if (opts.feature_dim > 0 && idx >= opts.feature_dim) return false;
      rec.features.push_back(idx);
    }
    ++field;
  }
  if (field < 2) return false;

  std::sort(rec.features.begin(), rec.features.end());
  if (std::adjacent_find(rec.features.begin(), rec.features.end()) != rec.features.end())
    return false;
  return true;
}

}  // namespace

ParseResult parse_log(std::istream& in, const ParseOptions& opts) {
  ParseResult result;
  std::string line;
  LogRecord rec;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (parse_line(line, opts, rec)) {
      result.records.push_back(rec);
    } else {
      ++result.skipped;
    }
  }
  if (in.bad()) throw std::runtime_error("I/O error while reading log stream");
  return result;
}

ParseResult parse_log_file(const std::string& path, const ParseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open log file: " + path);
  return parse_log(in, opts);
}

std::string serialize_record(const LogRecord& rec) {
  std::string out = std::to_string(rec.click);
  out += ' ';
  out += std::to_string(rec.market_price);
  for (int idx : rec.features) {
    out += ' ';
    out += std::to_string(idx);
    out += ":1";
  }
  return out;
}

void write_records(std::ostream& out, const std::vector<LogRecord>& records) {
  for (const auto& rec : records) out << serialize_record(rec) << '\n';
}

void write_records_file(const std::string& path, const std::vector<LogRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  write_records(out, records);
  if (!out) throw std::runtime_error("write failed: " + path);
}

CampaignStats basic_stats(const std::vector<LogRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no training data");
  CampaignStats stats;
  std::int64_t total_price = 0;
  for (const auto& rec : records) {
    total_price += rec.market_price;
    stats.n_clicks += rec.click;
    stats.max_price = std::max(stats.max_price, rec.market_price);
  }
  stats.n_records = static_cast<std::int64_t>(records.size());
  stats.cpm_train = static_cast<double>(total_price) / static_cast<double>(stats.n_records);
  return stats;
}

CampaignStats campaign_stats(const std::vector<LogRecord>& records, const CtrModel& ctr) {
  CampaignStats stats = basic_stats(records);
  double theta_sum = 0.0;
  for (const auto& rec : records) theta_sum += predict_ctr(ctr, rec.features);
  stats.theta_avg = theta_sum / static_cast<double>(stats.n_records);
  return stats;
}

void write_kv_file(const std::string& path, const std::map<std::string, std::string>& kv) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  for (const auto& [key, value] : kv) out << key << '=' << value << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::map<std::string, std::string> read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

void write_stats_file(const std::string& path, const CampaignStats& stats) {
  std::map<std::string, std::string> kv;
  std::ostringstream cpm, theta;
  cpm.precision(17);
  cpm << stats.cpm_train;
  theta.precision(17);
  theta << stats.theta_avg;
  kv["cpm_train"] = cpm.str();
  kv["theta_avg"] = theta.str();
  kv["n_records"] = std::to_string(stats.n_records);
  kv["n_clicks"] = std::to_string(stats.n_clicks);
  kv["max_price"] = std::to_string(stats.max_price);
  write_kv_file(path, kv);
}

CampaignStats read_stats_file(const std::string& path) {
  auto kv = read_kv_file(path);
  CampaignStats stats;
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error(path + ": missing key " + key);
    return it->second;
  };
  stats.cpm_train = std::stod(need("cpm_train"));
  stats.theta_avg = std::stod(need("theta_avg"));
  stats.n_records = std::stoll(need("n_records"));
  stats.n_clicks = std::stoll(need("n_clicks"));
  stats.max_price = std::stoi(need("max_price"));
  return stats;
}

}  // namespace bidopt
