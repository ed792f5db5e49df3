// Repeated-transaction spam metrics over transaction logs.
//
// Transactions with identical (chain, sender, recipient, value, selector,
// calldata hash) form bursts: the first occurrence opens a burst at its
// timestamp t0 and every identical transaction with timestamp <= t0 + window
// is labeled repeated. The first transaction past the window opens the next
// burst. Repeated transactions are then aggregated per chain and UTC day.
#pragma once

#include <chrono>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tbspam/eth_amount.hpp"

namespace tbspam::metrics {

inline constexpr std::int64_t kDefaultWindowMs = 2000;
inline constexpr std::int64_t kRobustnessWindowMs = 5000;

enum class TxStatus { success, failed };

struct TransactionRecord {
  std::string chain;
  std::int64_t timestamp_ms = 0;
  std::string tx_hash;
  std::string sender;
  std::string recipient;
  std::string value;     // integer amount in the chain's smallest unit
  std::string selector;  // "0x" + 8 hex digits, or empty
  std::string calldata_hash;
  EthAmount gas_fee;
  TxStatus status = TxStatus::success;
  bool timeboosted = false;

  bool operator==(const TransactionRecord&) const = default;
};

struct BurstKey {
  std::string chain;
  std::string sender;
  std::string recipient;
  std::string value;
  std::string selector;
  std::string calldata_hash;

  bool operator==(const BurstKey&) const = default;
  auto operator<=>(const BurstKey&) const = default;
};

BurstKey burst_key(const TransactionRecord& tx);

struct AuctionRound {
  std::int64_t round_id = 0;
  std::int64_t timestamp_ms = 0;
  EthAmount payment;  // second-highest bid
};

struct PanelRow {
  std::string chain;
  std::chrono::sys_days date;
  std::uint64_t rep_txs = 0;
  EthAmount rep_gas;  // gas of failed repeated transactions
  std::uint64_t failed_rep_txs = 0;
  std::optional<double> pct_failed;  // nullopt when there is nothing to divide by
  EthAmount revenue;

  bool operator==(const PanelRow&) const = default;
};

/// The header line is wrong; nothing was read.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RowError {
  std::size_t line;
  std::string message;
};

template <typename T>
struct IngestResult {
  std::vector<T> records;
  std::vector<RowError> errors;

  bool ok() const { return errors.empty(); }
};

inline constexpr std::string_view kTransactionHeader =
    "chain,timestamp_ms,tx_hash,sender,recipient,value,selector,calldata_hash,gas_fee_eth,status,"
    "timeboosted";
inline constexpr std::string_view kAuctionHeader = "round_id,timestamp_ms,payment_eth";
inline constexpr std::string_view kPanelHeader =
    "chain,date,rep_txs,rep_gas_eth,failed_rep_txs,pct_failed,revenue_eth";

/// Reads a transaction CSV. Valid rows come back sorted by
/// (timestamp, tx_hash, chain); invalid rows and duplicate hashes within a
/// chain are reported with their line numbers and left out.
IngestResult<TransactionRecord> ingest_transactions(std::istream& in);

IngestResult<AuctionRound> ingest_auctions(std::istream& in);

/// One flag per record: true when the record repeats an earlier member of its
/// burst. Records must be sorted by (timestamp, tx_hash).
std::vector<bool> detect_repeats(std::span<const TransactionRecord> records,
                                 std::int64_t window_ms = kDefaultWindowMs);

/// Daily panel, ordered by (chain, date). A row exists for every (chain, day)
/// with at least one transaction and for every treated-chain day with an
/// auction round. On the treated chain, failed_rep_txs and pct_failed only
/// count non-timeboosted repeats, and revenue includes that day's auction
/// payments.
std::vector<PanelRow> aggregate_daily(std::span<const TransactionRecord> records,
                                      const std::vector<bool>& repeated,
                                      std::span<const AuctionRound> auctions,
                                      const std::string& treated_chain);

/// Writes the panel CSV; returns the number of bytes written.
std::size_t export_panel(std::span<const PanelRow> rows, std::ostream& out);

/// Reads a panel CSV written by export_panel.
IngestResult<PanelRow> read_panel(std::istream& in);

std::chrono::sys_days utc_day(std::int64_t timestamp_ms);
std::string format_date(std::chrono::sys_days day);
std::optional<std::chrono::sys_days> parse_date(std::string_view text);

}  // namespace tbspam::metrics
