#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace bidopt {

struct CtrModel;

/// One auction event from an impression log.
struct LogRecord {
  int click = 0;              // user response label, 0 or 1
  int market_price = 0;       // highest competing bid, integer price units
  std::vector<int> features;  // strictly increasing one-hot feature indices

  bool operator==(const LogRecord&) const = default;
};

/// Campaign-level aggregates computed from a training log.
struct CampaignStats {
  double cpm_train = 0.0;   // mean market price (prices are per-mille units)
  double theta_avg = 0.0;   // mean predicted CTR over training impressions
  std::int64_t n_records = 0;
  std::int64_t n_clicks = 0;
  int max_price = 0;
};

/// Schema knobs for parsing a canonical log.
/// feature_dim == 0 accepts any index; delta_max == 0 disables clamping.
struct ParseOptions {
  int feature_dim = 0;
  int delta_max = 0;
};

struct ParseResult {
  std::vector<LogRecord> records;
  std::int64_t skipped = 0;  // malformed lines dropped
};

/// Parses a canonical log stream: `<click> <price> <idx>:1 <idx>:1 ...`.
/// Malformed lines (bad click, negative price, duplicate or out-of-range
/// indices) are counted in `skipped` and dropped.
ParseResult parse_log(std::istream& in, const ParseOptions& opts = {});

/// Same as parse_log, reading from a file. Throws std::runtime_error if the
/// file cannot be opened.
ParseResult parse_log_file(const std::string& path, const ParseOptions& opts = {});

/// Canonical one-line serialization, inverse of parse_log for valid records.
std::string serialize_record(const LogRecord& rec);

void write_records(std::ostream& out, const std::vector<LogRecord>& records);
void write_records_file(const std::string& path, const std::vector<LogRecord>& records);

/// Aggregates cpm_train, theta_avg and counts. Throws std::invalid_argument
/// on an empty record sequence.
CampaignStats campaign_stats(const std::vector<LogRecord>& records, const CtrModel& ctr);

/// Counts-only variant used before a CTR model exists (theta_avg left 0).
CampaignStats basic_stats(const std::vector<LogRecord>& records);

// Flat key=value text files (campaign stats, schema configs).
void write_kv_file(const std::string& path, const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> read_kv_file(const std::string& path);

void write_stats_file(const std::string& path, const CampaignStats& stats);
CampaignStats read_stats_file(const std::string& path);

}  // namespace bidopt
