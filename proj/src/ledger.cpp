#include "planexec/ledger.hpp"

#include <algorithm>

#include "planexec/digest.hpp"

namespace planexec {

namespace {

constexpr int kMaxCallDepth = 16;

std::string zero_digest() { return std::string(64, '0'); }

Block make_genesis() {
  Block genesis;
  genesis.index = 0;
  genesis.prev_digest = zero_digest();
  genesis.digest = genesis.compute_digest();
  return genesis;
}

}  // namespace

std::string Transaction::encode_unsigned() const {
  Encoder enc;
  enc.bytes(sender).bytes(target).bytes(op).list(args).u64(nonce);
  return enc.str();
}

std::string Transaction::encode() const {
  Encoder enc;
  enc.bytes(encode_unsigned()).bytes(signature);
  return enc.str();
}

std::string Transaction::digest() const { return sha256_hex(encode()); }

std::string Block::compute_digest() const {
  Encoder enc;
  enc.u64(index).bytes(prev_digest);
  enc.u64(transactions.size());
  for (const auto& tx : transactions) {
    enc.bytes(tx.encode());
  }
  return sha256_hex(enc.str());
}

ChainState::ChainState(const ChainState& other) { *this = other; }

ChainState& ChainState::operator=(const ChainState& other) {
  if (this == &other) return *this;
  contracts.clear();
  for (const auto& [addr, contract] : other.contracts) {
    contracts.emplace(addr, contract->clone());
  }
  completed = other.completed;
  return *this;
}

CallContext::CallContext(Ledger& ledger, ChainState& state, std::string self,
                         std::string tx_sender, std::string caller,
                         bool caller_is_contract, std::vector<Event>* events,
                         int depth)
    : ledger_(ledger),
      state_(state),
      self_(std::move(self)),
      tx_sender_(std::move(tx_sender)),
      caller_(std::move(caller)),
      caller_is_contract_(caller_is_contract),
      events_(events),
      depth_(depth) {}

std::vector<std::string> CallContext::call(const std::string& target,
                                           const std::string& op,
                                           const std::vector<std::string>& args) {
  return ledger_.nested_call(state_, tx_sender_, self_, target, op, args,
                             events_, depth_ + 1);
}

void CallContext::emit(const std::string& name, std::vector<std::string> args) {
  events_->push_back(Event{self_, name, std::move(args), ledger_.next_event_seq()});
}

void CallContext::abort(const std::string& reason) const {
  throw ContractAbort(reason);
}

const std::vector<ActionId>& CallContext::completed_list() const {
  return state_.completed;
}

void CallContext::append_completed(const ActionId& id) {
  if (std::find(state_.completed.begin(), state_.completed.end(), id) !=
      state_.completed.end()) {
    throw ContractAbort("duplicate");
  }
  state_.completed.push_back(id);
}

bool CallContext::contract_exists(const std::string& address) const {
  return state_.contracts.count(address) > 0;
}

Ledger::Ledger() { chain_.push_back(make_genesis()); }

void Ledger::register_identity(const std::string& id) {
  // Simulated key material; attribution rests on the keyed digest, not on
  // real asymmetric cryptography.
  identities_[id] = Identity{id, sha256_hex("key:" + id)};
}

bool Ledger::has_identity(const std::string& id) const {
  return identities_.count(id) > 0;
}

void Ledger::register_contract_kind(const std::string& kind,
                                    ContractFactory factory) {
  factories_[kind] = std::move(factory);
}

Transaction Ledger::build_tx(const std::string& sender, const std::string& target,
                             const std::string& op, std::vector<std::string> args,
                             std::uint64_t nonce) const {
  auto it = identities_.find(sender);
  if (it == identities_.end()) throw error("unknown identity: " + sender);
  Transaction tx;
  tx.sender = sender;
  tx.target = target;
  tx.op = op;
  tx.args = std::move(args);
  tx.nonce = nonce;
  tx.signature = keyed_digest(it->second.key, tx.encode_unsigned());
  return tx;
}

std::string Ledger::deploy_address(const std::string& deployer,
                                   std::uint64_t nonce) {
  Encoder enc;
  enc.bytes("deploy").bytes(deployer).u64(nonce);
  return sha256_hex(enc.str()).substr(0, 40);
}

Receipt Ledger::submit(const Transaction& tx) {
  Receipt receipt;
  receipt.tx_digest = tx.digest();
  receipt.block_index = chain_.size();
  receipt.sender = tx.sender;
  receipt.target = tx.target;
  receipt.op = tx.op;

  auto reject = [&](const std::string& reason) {
    receipt.accepted = false;
    receipt.reject_reason = reason;
    receipt.seq = next_event_seq();
    receipts_.push_back(receipt);
    return receipt;
  };

  auto identity = identities_.find(tx.sender);
  if (identity == identities_.end()) return reject("auth");
  if (tx.signature != keyed_digest(identity->second.key, tx.encode_unsigned())) {
    return reject("auth");
  }
  auto last = last_nonce_.find(tx.sender);
  if (last != last_nonce_.end() && tx.nonce <= last->second) {
    return reject("nonce");
  }

  ChainState snapshot = state_;
  try {
    if (tx.target.empty() && tx.op == "deploy") {
      if (tx.args.empty()) throw ContractAbort("bad-deploy");
      auto factory = factories_.find(tx.args[0]);
      if (factory == factories_.end()) throw ContractAbort("bad-deploy");
      ordered_json ctor_args = ordered_json::object();
      if (tx.args.size() > 1) {
        ctor_args = ordered_json::parse(tx.args[1], nullptr, false);
        if (ctor_args.is_discarded()) throw ContractAbort("bad-deploy");
      }
      auto address = deploy_address(tx.sender, tx.nonce);
      if (state_.contracts.count(address)) throw ContractAbort("bad-deploy");
      state_.contracts.emplace(address, factory->second(tx.sender, ctor_args));
    } else {
      auto target = state_.contracts.find(tx.target);
      if (target == state_.contracts.end()) throw ContractAbort("no-contract");
      CallContext ctx(*this, state_, tx.target, tx.sender, tx.sender,
                      /*caller_is_contract=*/false, &receipt.events, 0);
      target->second->invoke(ctx, tx.op, tx.args);
    }
  } catch (const ContractAbort& abort) {
    state_ = std::move(snapshot);
    receipt.accepted = false;
    receipt.reject_reason = abort.reason();
    receipt.seq = next_event_seq();
    receipts_.push_back(receipt);
    return receipt;
  }

  last_nonce_[tx.sender] = tx.nonce;
  pending_.push_back(tx);
  receipt.accepted = true;
  receipt.seq = next_event_seq();
  receipts_.push_back(receipt);
  return receipt;
}

std::vector<std::string> Ledger::nested_call(
    ChainState& state, const std::string& tx_sender,
    const std::string& caller_contract, const std::string& target,
    const std::string& op, const std::vector<std::string>& args,
    std::vector<Event>* events, int depth) {
  if (depth > kMaxCallDepth) throw ContractAbort("call-depth");
  auto it = state.contracts.find(target);
  if (it == state.contracts.end()) throw ContractAbort("no-contract");
  CallContext ctx(*this, state, target, tx_sender, caller_contract,
                  /*caller_is_contract=*/true, events, depth);
  return it->second->invoke(ctx, op, args);
}

Block Ledger::seal_block() {
  Block block;
  block.index = chain_.size();
  block.prev_digest = chain_.back().digest;
  block.transactions = std::move(pending_);
  pending_.clear();
  block.digest = block.compute_digest();
  chain_.push_back(block);
  return block;
}

bool Ledger::verify_chain() const { return verify_blocks(chain_); }

bool Ledger::verify_blocks(const std::vector<Block>& blocks) {
  if (blocks.empty()) return false;
  const Block genesis = make_genesis();
  const Block& b0 = blocks.front();
  if (b0.index != 0 || b0.prev_digest != genesis.prev_digest ||
      !b0.transactions.empty() || b0.digest != genesis.digest) {
    return false;
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    if (b.index != i) return false;
    if (b.digest != b.compute_digest()) return false;
    if (i > 0 && b.prev_digest != blocks[i - 1].digest) return false;
  }
  return true;
}

std::vector<Event> Ledger::query_events(const std::string& contract,
                                        const std::string& name) const {
  std::vector<Event> out;
  for (const auto& receipt : receipts_) {
    for (const auto& event : receipt.events) {
      if (!contract.empty() && event.contract != contract) continue;
      if (!name.empty() && event.name != name) continue;
      out.push_back(event);
    }
  }
  return out;
}

const Contract* Ledger::contract_at(const std::string& address) const {
  auto it = state_.contracts.find(address);
  return it == state_.contracts.end() ? nullptr : it->second.get();
}

std::string Ledger::state_digest() const {
  Encoder enc;
  for (const auto& [addr, contract] : state_.contracts) {
    enc.bytes(addr).bytes(contract->kind()).bytes(contract->state_json().dump());
  }
  enc.list(state_.completed);
  return sha256_hex(enc.str());
}

}  // namespace planexec
