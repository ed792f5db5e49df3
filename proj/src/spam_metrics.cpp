#include "tbspam/spam_metrics.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <fmt/core.h>

#include "tbspam/csv.hpp"

namespace tbspam::metrics {

namespace {

constexpr std::int64_t kMsPerDay = 86'400'000;

bool is_hex(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
  });
}

bool is_hex_word(std::string_view s, std::size_t digits) {
  return s.size() == digits + 2 && s.starts_with("0x") && is_hex(s.substr(2));
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::string strip_bom(std::string s) {
  if (s.starts_with("\xEF\xBB\xBF")) s.erase(0, 3);
  return s;
}

void read_header(csv::Reader& reader, std::string_view expected) {
  const auto header = reader.next();
  std::string joined;
  if (header) {
    for (std::size_t i = 0; i < header->fields.size(); ++i) {
      joined += (i ? "," : "") + (i ? header->fields[i] : strip_bom(header->fields[i]));
    }
  }
  if (joined != expected) {
    throw SchemaError(fmt::format("expected header '{}', got '{}'", expected, joined));
  }
}

// Throws std::invalid_argument with a field-specific message.
TransactionRecord parse_transaction(const std::vector<std::string>& f) {
  const auto bad = [](const char* field, const std::string& why) {
    return std::invalid_argument(fmt::format("{}: {}", field, why));
  };
  if (f.size() != 11) {
    throw std::invalid_argument(fmt::format("expected 11 fields, got {}", f.size()));
  }
  TransactionRecord tx;
  tx.chain = f[0];
  if (tx.chain.empty()) throw bad("chain", "empty");
  const auto ts = parse_int<std::int64_t>(f[1]);
  if (!ts || *ts <= 0) throw bad("timestamp_ms", fmt::format("'{}' is not a positive integer", f[1]));
  tx.timestamp_ms = *ts;
  tx.tx_hash = f[2];
  if (tx.tx_hash.size() <= 2 || !tx.tx_hash.starts_with("0x") || !is_hex(tx.tx_hash.substr(2))) {
    throw bad("tx_hash", fmt::format("'{}' is not 0x-prefixed hex", f[2]));
  }
  tx.sender = f[3];
  if (tx.sender.empty()) throw bad("sender", "empty");
  tx.recipient = f[4];
  tx.value = f[5];
  if (tx.value.empty() || !std::all_of(tx.value.begin(), tx.value.end(),
                                       [](char c) { return c >= '0' && c <= '9'; })) {
    throw bad("value", fmt::format("'{}' is not a nonnegative integer", f[5]));
  }
  tx.selector = f[6];
  if (!tx.selector.empty() && !is_hex_word(tx.selector, 8)) {
    throw bad("selector", fmt::format("'{}' is not a 4-byte hex selector", f[6]));
  }
  tx.calldata_hash = f[7];
  if (!is_hex_word(tx.calldata_hash, 64)) {
    throw bad("calldata_hash", fmt::format("'{}' is not a 32-byte hex digest", f[7]));
  }
  if (f[8].starts_with('-')) throw bad("gas_fee_eth", fmt::format("'{}' is negative", f[8]));
  try {
    tx.gas_fee = EthAmount::parse(f[8]);
  } catch (const std::invalid_argument& e) {
    throw bad("gas_fee_eth", e.what());
  }
  if (f[9] == "success") {
    tx.status = TxStatus::success;
  } else if (f[9] == "failed") {
    tx.status = TxStatus::failed;
  } else {
    throw bad("status", fmt::format("'{}' is neither success nor failed", f[9]));
  }
  if (f[10] == "true" || f[10] == "1") {
    tx.timeboosted = true;
  } else if (f[10] == "false" || f[10] == "0") {
    tx.timeboosted = false;
  } else {
    throw bad("timeboosted", fmt::format("'{}' is not a boolean", f[10]));
  }
  return tx;
}

AuctionRound parse_auction(const std::vector<std::string>& f) {
  if (f.size() != 3) {
    throw std::invalid_argument(fmt::format("expected 3 fields, got {}", f.size()));
  }
  AuctionRound a;
  const auto id = parse_int<std::int64_t>(f[0]);
  if (!id) throw std::invalid_argument(fmt::format("round_id: '{}' is not an integer", f[0]));
  a.round_id = *id;
  const auto ts = parse_int<std::int64_t>(f[1]);
  if (!ts || *ts <= 0) {
    throw std::invalid_argument(fmt::format("timestamp_ms: '{}' is not a positive integer", f[1]));
  }
  a.timestamp_ms = *ts;
  if (f[2].starts_with('-')) {
    throw std::invalid_argument(fmt::format("payment_eth: '{}' is negative", f[2]));
  }
  try {
    a.payment = EthAmount::parse(f[2]);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(fmt::format("payment_eth: {}", e.what()));
  }
  return a;
}

// Parses every data row; `lines` receives the source line of each record.
template <typename T, typename Parse>
IngestResult<T> ingest(std::istream& in, std::string_view header, Parse parse,
                       std::vector<std::size_t>& lines) {
  csv::Reader reader(in);
  read_header(reader, header);
  IngestResult<T> result;
  for (;;) {
    std::optional<csv::Record> rec;
    try {
      rec = reader.next();
    } catch (const csv::ParseError& e) {
      result.errors.push_back({e.line(), e.what()});
      break;
    }
    if (!rec) break;
    try {
      result.records.push_back(parse(rec->fields));
      lines.push_back(rec->line);
    } catch (const std::invalid_argument& e) {
      result.errors.push_back({rec->line, e.what()});
    }
  }
  return result;
}

// Removes records whose key was already seen, reporting each as an error.
template <typename T, typename Key>
void drop_duplicates(IngestResult<T>& result, const std::vector<std::size_t>& lines,
                     Key key, const char* what) {
  std::set<decltype(key(result.records.front()))> seen;
  std::vector<T> kept;
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    if (!seen.insert(key(result.records[i])).second) {
      result.errors.push_back({lines[i], fmt::format("duplicate {}", what)});
    } else {
      kept.push_back(std::move(result.records[i]));
    }
  }
  result.records = std::move(kept);
  std::stable_sort(result.errors.begin(), result.errors.end(),
                   [](const RowError& a, const RowError& b) { return a.line < b.line; });
}

std::string format_pct(const std::optional<double>& pct) {
  return pct ? fmt::format("{:.6f}", *pct) : std::string{};
}

}  // namespace

BurstKey burst_key(const TransactionRecord& tx) {
  return {tx.chain, tx.sender, tx.recipient, tx.value, tx.selector, tx.calldata_hash};
}

std::chrono::sys_days utc_day(std::int64_t timestamp_ms) {
  std::int64_t days = timestamp_ms / kMsPerDay;
  if (timestamp_ms % kMsPerDay < 0) --days;
  return std::chrono::sys_days{std::chrono::days{days}};
}

std::string format_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

std::optional<std::chrono::sys_days> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  const auto y = parse_int<int>(text.substr(0, 4));
  const auto m = parse_int<unsigned>(text.substr(5, 2));
  const auto d = parse_int<unsigned>(text.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{*m},
                                        std::chrono::day{*d}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days{ymd};
}

IngestResult<TransactionRecord> ingest_transactions(std::istream& in) {
  std::vector<std::size_t> lines;
  auto result = ingest<TransactionRecord>(in, kTransactionHeader, parse_transaction, lines);
  if (!result.records.empty()) {
    drop_duplicates(
        result, lines,
        [](const TransactionRecord& tx) { return std::pair{tx.chain, tx.tx_hash}; },
        "tx_hash within chain");
  }
  std::sort(result.records.begin(), result.records.end(),
            [](const TransactionRecord& a, const TransactionRecord& b) {
              return std::tie(a.timestamp_ms, a.tx_hash, a.chain) <
                     std::tie(b.timestamp_ms, b.tx_hash, b.chain);
            });
  return result;
}

IngestResult<AuctionRound> ingest_auctions(std::istream& in) {
  std::vector<std::size_t> lines;
  auto result = ingest<AuctionRound>(in, kAuctionHeader, parse_auction, lines);
  if (!result.records.empty()) {
    drop_duplicates(result, lines, [](const AuctionRound& a) { return a.round_id; },
                    "round_id");
  }
  std::sort(result.records.begin(), result.records.end(),
            [](const AuctionRound& a, const AuctionRound& b) {
              return std::tie(a.timestamp_ms, a.round_id) < std::tie(b.timestamp_ms, b.round_id);
            });
  return result;
}

std::vector<bool> detect_repeats(std::span<const TransactionRecord> records,
                                 std::int64_t window_ms) {
  if (window_ms <= 0) {
    throw std::invalid_argument(fmt::format("window_ms must be positive, got {}", window_ms));
  }
  std::map<BurstKey, std::int64_t> burst_start;
  std::vector<bool> repeated(records.size(), false);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& tx = records[i];
    if (i > 0 && std::tie(tx.timestamp_ms, tx.tx_hash) <
                     std::tie(records[i - 1].timestamp_ms, records[i - 1].tx_hash)) {
      throw std::invalid_argument("detect_repeats: records are not sorted by (timestamp, tx_hash)");
    }
    auto [it, fresh] = burst_start.try_emplace(burst_key(tx), tx.timestamp_ms);
    if (fresh) continue;
    if (tx.timestamp_ms <= it->second + window_ms) {
      repeated[i] = true;
    } else {
      it->second = tx.timestamp_ms;
    }
  }
  return repeated;
}

std::vector<PanelRow> aggregate_daily(std::span<const TransactionRecord> records,
                                      const std::vector<bool>& repeated,
                                      std::span<const AuctionRound> auctions,
                                      const std::string& treated_chain) {
  if (repeated.size() != records.size()) {
    throw std::invalid_argument("aggregate_daily: one label per record required");
  }
  if (!auctions.empty() && treated_chain.empty()) {
    throw std::invalid_argument("aggregate_daily: auction rounds given without a treated chain");
  }
  struct Day {
    std::uint64_t rep_txs = 0;
    EthAmount rep_gas;
    std::uint64_t counted = 0;  // PctFailed denominator
    std::uint64_t failed = 0;
    EthAmount auctions;
  };
  std::map<std::pair<std::string, std::chrono::sys_days>, Day> days;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& tx = records[i];
    Day& day = days[{tx.chain, utc_day(tx.timestamp_ms)}];
    if (!repeated[i]) continue;
    const bool failed = tx.status == TxStatus::failed;
    ++day.rep_txs;
    if (failed) day.rep_gas += tx.gas_fee;
    if (tx.timeboosted && tx.chain == treated_chain) continue;
    ++day.counted;
    if (failed) ++day.failed;
  }
  for (const auto& a : auctions) days[{treated_chain, utc_day(a.timestamp_ms)}].auctions += a.payment;

  std::vector<PanelRow> rows;
  rows.reserve(days.size());
  for (const auto& [key, day] : days) {
    PanelRow row;
    row.chain = key.first;
    row.date = key.second;
    row.rep_txs = day.rep_txs;
    row.rep_gas = day.rep_gas;
    row.failed_rep_txs = day.failed;
    if (day.counted > 0) {
      row.pct_failed = static_cast<double>(day.failed) / static_cast<double>(day.counted);
    }
    row.revenue = day.rep_gas + day.auctions;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t export_panel(std::span<const PanelRow> rows, std::ostream& out) {
  std::ostringstream buf;
  buf << kPanelHeader << '\n';
  for (const auto& row : rows) {
    csv::write_record(buf, {row.chain, format_date(row.date), std::to_string(row.rep_txs),
                            row.rep_gas.to_string(), std::to_string(row.failed_rep_txs),
                            format_pct(row.pct_failed), row.revenue.to_string()});
  }
  const std::string text = buf.str();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("failed to write panel output");
  return text.size();
}

IngestResult<PanelRow> read_panel(std::istream& in) {
  const auto parse = [](const std::vector<std::string>& f) {
    if (f.size() != 7) {
      throw std::invalid_argument(fmt::format("expected 7 fields, got {}", f.size()));
    }
    PanelRow row;
    row.chain = f[0];
    const auto date = parse_date(f[1]);
    if (!date) throw std::invalid_argument(fmt::format("date: '{}' is not YYYY-MM-DD", f[1]));
    row.date = *date;
    const auto rep = parse_int<std::uint64_t>(f[2]);
    const auto failed = parse_int<std::uint64_t>(f[4]);
    if (!rep) throw std::invalid_argument(fmt::format("rep_txs: '{}' is not a count", f[2]));
    if (!failed) throw std::invalid_argument(fmt::format("failed_rep_txs: '{}' is not a count", f[4]));
    row.rep_txs = *rep;
    row.failed_rep_txs = *failed;
    row.rep_gas = EthAmount::parse(f[3]);
    row.revenue = EthAmount::parse(f[6]);
    if (!f[5].empty()) {
      double pct = 0;
      const auto [ptr, ec] = std::from_chars(f[5].data(), f[5].data() + f[5].size(), pct);
      if (ec != std::errc{} || ptr != f[5].data() + f[5].size() || pct < 0 || pct > 1) {
        throw std::invalid_argument(fmt::format("pct_failed: '{}' is not a fraction", f[5]));
      }
      row.pct_failed = pct;
    }
    return row;
  };
  std::vector<std::size_t> lines;
  return ingest<PanelRow>(in, kPanelHeader, parse, lines);
}

}  // namespace tbspam::metrics
