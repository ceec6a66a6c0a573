#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "planexec/errors.hpp"
#include "planexec/plan.hpp"

namespace planexec {

using ordered_json = nlohmann::ordered_json;

struct Identity {
  std::string id;
  std::string key;  // simulated signing key
};

struct Transaction {
  std::string sender;  // identity id
  std::string target;  // contract address; empty for deploys
  std::string op;
  std::vector<std::string> args;
  std::uint64_t nonce = 0;
  std::string signature;

  // Canonical encoding of all fields except (resp. including) the signature.
  std::string encode_unsigned() const;
  std::string encode() const;
  std::string digest() const;
};

struct Event {
  std::string contract;
  std::string name;
  std::vector<std::string> args;
  std::uint64_t seq = 0;
};

struct Receipt {
  std::string tx_digest;
  bool accepted = false;
  std::string reject_reason;       // empty when accepted
  std::vector<Event> events;       // kept even when the tx was rejected
  std::uint64_t seq = 0;
  std::uint64_t block_index = 0;   // block the tx was (or would be) sealed in
  std::string sender;
  std::string target;
  std::string op;
};

struct Block {
  std::uint64_t index = 0;
  std::string prev_digest;
  std::vector<Transaction> transactions;  // accepted transactions only
  std::string digest;

  std::string compute_digest() const;
};

// Thrown by contract code to reject the enclosing transaction. All state
// changes roll back; events emitted so far stay in the receipt.
class ContractAbort {
 public:
  explicit ContractAbort(std::string reason) : reason_(std::move(reason)) {}
  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
};

class Ledger;
struct ChainState;

// Execution context handed to contract code. `caller` is the immediate
// caller: an identity id at the top level, a contract address for nested
// calls. `tx_sender` is always the signing identity.
class CallContext {
 public:
  CallContext(Ledger& ledger, ChainState& state, std::string self,
              std::string tx_sender, std::string caller,
              bool caller_is_contract, std::vector<Event>* events, int depth);

  const std::string& self() const { return self_; }
  const std::string& tx_sender() const { return tx_sender_; }
  const std::string& caller() const { return caller_; }
  bool caller_is_contract() const { return caller_is_contract_; }

  std::vector<std::string> call(const std::string& target,
                                const std::string& op,
                                const std::vector<std::string>& args);
  void emit(const std::string& name, std::vector<std::string> args);
  [[noreturn]] void abort(const std::string& reason) const;

  // The completed-actions list shared across contracts through the chain.
  const std::vector<ActionId>& completed_list() const;
  void append_completed(const ActionId& id);

  bool contract_exists(const std::string& address) const;

 private:
  Ledger& ledger_;
  ChainState& state_;
  std::string self_;
  std::string tx_sender_;
  std::string caller_;
  bool caller_is_contract_;
  std::vector<Event>* events_;
  int depth_;
};

class Contract {
 public:
  virtual ~Contract() = default;
  virtual std::string kind() const = 0;
  virtual std::unique_ptr<Contract> clone() const = 0;
  virtual std::vector<std::string> invoke(CallContext& ctx,
                                          const std::string& op,
                                          const std::vector<std::string>& args) = 0;
  virtual ordered_json state_json() const = 0;
};

struct ChainState {
  std::map<std::string, std::unique_ptr<Contract>> contracts;
  std::vector<ActionId> completed;

  ChainState() = default;
  ChainState(const ChainState& other);
  ChainState& operator=(const ChainState& other);
  ChainState(ChainState&&) = default;
  ChainState& operator=(ChainState&&) = default;
};

using ContractFactory =
    std::function<std::unique_ptr<Contract>(const std::string& deployer,
                                            const ordered_json& args)>;

// Single deterministic validator over an append-only hash chain. Transactions
// execute atomically: a rejected transaction leaves contract state untouched
// and never enters a block, but its receipt (with events) is recorded.
class Ledger {
 public:
  Ledger();

  void register_identity(const std::string& id);
  bool has_identity(const std::string& id) const;
  void register_contract_kind(const std::string& kind, ContractFactory factory);

  // Fills in the signature for tx.sender; throws if the identity is unknown.
  Transaction build_tx(const std::string& sender, const std::string& target,
                       const std::string& op, std::vector<std::string> args,
                       std::uint64_t nonce) const;

  Receipt submit(const Transaction& tx);
  Block seal_block();
  bool verify_chain() const;
  static bool verify_blocks(const std::vector<Block>& blocks);

  // Events in block order then intra-block order, including events of
  // rejected transactions. Empty filters match everything.
  std::vector<Event> query_events(const std::string& contract = "",
                                  const std::string& name = "") const;

  const std::vector<Block>& chain() const { return chain_; }
  const std::vector<Receipt>& receipts() const { return receipts_; }
  const Contract* contract_at(const std::string& address) const;
  const std::vector<ActionId>& completed_list() const { return state_.completed; }

  // Deterministic address derived from (deployer, nonce).
  static std::string deploy_address(const std::string& deployer,
                                    std::uint64_t nonce);

  // Canonical digest over all contract state; used to check atomicity.
  std::string state_digest() const;

 private:
  friend class CallContext;
  std::vector<std::string> nested_call(ChainState& state,
                                       const std::string& tx_sender,
                                       const std::string& caller_contract,
                                       const std::string& target,
                                       const std::string& op,
                                       const std::vector<std::string>& args,
                                       std::vector<Event>* events, int depth);
  std::uint64_t next_event_seq() { return seq_++; }

  std::map<std::string, Identity> identities_;
  std::map<std::string, std::uint64_t> last_nonce_;  // per accepted sender
  std::map<std::string, ContractFactory> factories_;
  ChainState state_;
  std::vector<Block> chain_;
  std::vector<Transaction> pending_;
  std::vector<Receipt> receipts_;
  std::uint64_t seq_ = 0;
};

}  // namespace planexec
