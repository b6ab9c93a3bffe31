#include "haechi/audit/audit.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace haechi {

namespace {

using Json = nlohmann::json;

std::string txs(std::uint64_t id) { return "tx " + std::to_string(id); }

std::map<std::uint64_t, ProcessedAt> processed_index(const Trace& trace) {
  std::map<std::uint64_t, ProcessedAt> out;
  for (const auto& ev : trace.events()) {
    if (ev.kind != EventKind::Processed || !ev.subject.is_tx()) continue;
    ProcessedAt p;
    p.shard = ev.location;
    p.height = ev.detail.value("height", Height{0});
    p.block_ts = ev.detail.value("block_ts", Time{0});
    p.index = ev.detail.value("index", std::uint64_t{0});
    p.seq = ev.seq;
    out.emplace(ev.subject.a, p);
  }
  return out;
}

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool is_outcome(EventKind k) { return k == EventKind::Committed || k == EventKind::Aborted; }

}  // namespace

const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::FairnessInversion: return "FairnessInversion";
    case ViolationKind::SafetyDivergence: return "SafetyDivergence";
    case ViolationKind::AtomicityBreak: return "AtomicityBreak";
    case ViolationKind::LivenessStall: return "LivenessStall";
    case ViolationKind::Lemma1Breach: return "Lemma1Breach";
    case ViolationKind::Lemma2Breach: return "Lemma2Breach";
    case ViolationKind::GapInOrderedHeights: return "GapInOrderedHeights";
  }
  return "?";
}

const char* to_string(ProcessingOrder o) {
  switch (o) {
    case ProcessingOrder::Before: return "before";
    case ProcessingOrder::After: return "after";
    case ProcessingOrder::Incomparable: return "incomparable";
  }
  return "?";
}

Json Violation::to_json() const {
  return Json{{"kind", to_string(kind)}, {"message", message}, {"evidence", evidence}, {"detail", detail}};
}

ProcessingOrder processing_order(const ProcessedAt& a, const ProcessedAt& b) {
  auto cmp = [](auto x, auto y) {
    if (x < y) return ProcessingOrder::Before;
    if (y < x) return ProcessingOrder::After;
    return ProcessingOrder::Incomparable;
  };
  if (a.shard == b.shard) {
    if (a.height == b.height) return cmp(a.index, b.index);
    return cmp(a.height, b.height);
  }
  return cmp(a.block_ts, b.block_ts);
}

ProcessingOrder processing_order(const Trace& trace, TxId a, TxId b) {
  const auto idx = processed_index(trace);
  auto ia = idx.find(value(a));
  auto ib = idx.find(value(b));
  if (ia == idx.end()) throw std::invalid_argument(txs(value(a)) + " was never processed");
  if (ib == idx.end()) throw std::invalid_argument(txs(value(b)) + " was never processed");
  return processing_order(ia->second, ib->second);
}

std::vector<Violation> check_finalization_fairness(const Trace& trace,
                                                   const std::optional<std::string>& contract,
                                                   AuditStats* stats) {
  const auto processed = processed_index(trace);
  // contract -> (tx, seq of its first Executed there), in execution order
  std::map<std::string, std::vector<std::pair<std::uint64_t, std::uint64_t>>> runs;
  std::set<std::pair<std::string, std::uint64_t>> seen;
  for (const auto& ev : trace.events()) {
    if (ev.kind != EventKind::Executed || !ev.subject.is_tx()) continue;
    auto c = ev.detail.value("contract", std::string{});
    if (c.empty() || (contract && c != *contract)) continue;
    if (!seen.emplace(c, ev.subject.a).second) continue;
    runs[c].emplace_back(ev.subject.a, ev.seq);
  }

  std::vector<Violation> out;
  std::size_t pairs = 0;
  for (const auto& [c, list] : runs) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      auto pi = processed.find(list[i].first);
      if (pi == processed.end()) continue;
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        auto pj = processed.find(list[j].first);
        if (pj == processed.end()) continue;
        ++pairs;
        if (processing_order(pj->second, pi->second) != ProcessingOrder::Before) continue;
        Violation v;
        v.kind = ViolationKind::FairnessInversion;
        v.message = txs(list[j].first) + " was processed before " + txs(list[i].first) +
                    " but executed after it on " + c;
        v.evidence = {pj->second.seq, pi->second.seq, list[i].second, list[j].second};
        v.detail = {{"contract", c},
                    {"processed_first", list[j].first},
                    {"executed_first", list[i].first}};
        out.push_back(std::move(v));
      }
    }
  }
  if (stats) stats->pairs_checked += pairs;
  return out;
}

std::vector<Violation> check_safety(const Trace& trace, AuditStats* stats) {
  std::vector<Violation> out;
  struct Seen {
    std::optional<std::uint64_t> commit_seq;
    std::optional<std::uint64_t> abort_seq;
  };
  std::map<std::uint64_t, Seen> outcomes;
  std::map<std::uint32_t, std::set<std::uint64_t>> executed_on;
  // per shard: txs in commitment order (first outcome event there)
  std::map<std::uint32_t, std::vector<std::pair<std::uint64_t, std::uint64_t>>> sequence;
  std::map<std::uint32_t, std::string> digest_input;
  std::set<std::pair<std::uint32_t, std::uint64_t>> listed;

  for (const auto& ev : trace.events()) {
    if (!ev.subject.is_tx()) continue;
    const auto s = value(ev.location);
    if (ev.kind == EventKind::Executed) {
      executed_on[s].insert(ev.subject.a);
      continue;
    }
    if (!is_outcome(ev.kind)) continue;
    auto& o = outcomes[ev.subject.a];
    (ev.kind == EventKind::Committed ? o.commit_seq : o.abort_seq) = ev.seq;
    if (listed.emplace(s, ev.subject.a).second) {
      sequence[s].emplace_back(ev.subject.a, ev.seq);
      digest_input[s] += std::to_string(ev.subject.a) +
                         (ev.kind == EventKind::Committed ? ":c;" : ":a;");
    }
  }

  for (const auto& [tx, o] : outcomes) {
    if (o.commit_seq && o.abort_seq) {
      Violation v;
      v.kind = ViolationKind::AtomicityBreak;
      v.message = txs(tx) + " committed on one shard and aborted on another";
      v.evidence = {std::min(*o.commit_seq, *o.abort_seq), std::max(*o.commit_seq, *o.abort_seq)};
      v.detail = {{"tx", tx}};
      out.push_back(std::move(v));
    }
  }

  // Relative order of transactions executed on both shards of a pair must match.
  std::vector<std::uint32_t> shards;
  for (const auto& [s, seq] : sequence) shards.push_back(s);
  for (std::size_t a = 0; a < shards.size(); ++a) {
    for (std::size_t b = a + 1; b < shards.size(); ++b) {
      const auto sa = shards[a];
      const auto sb = shards[b];
      const auto& ea = executed_on[sa];
      const auto& eb = executed_on[sb];
      std::unordered_map<std::uint64_t, std::pair<std::size_t, std::uint64_t>> pos_b;
      std::size_t k = 0;
      for (const auto& [tx, seq] : sequence[sb]) {
        if (ea.count(tx) && eb.count(tx)) pos_b[tx] = {k++, seq};
      }
      std::optional<std::pair<std::uint64_t, std::uint64_t>> prev;  // (tx, seq on a)
      std::size_t prev_pos = 0;
      for (const auto& [tx, seq] : sequence[sa]) {
        auto it = pos_b.find(tx);
        if (it == pos_b.end()) continue;
        if (prev && it->second.first < prev_pos) {
          Violation v;
          v.kind = ViolationKind::SafetyDivergence;
          v.message = "shards " + std::to_string(sa) + " and " + std::to_string(sb) +
                      " commit " + txs(prev->first) + " and " + txs(tx) + " in opposite orders";
          v.evidence = {prev->second, seq, it->second.second};
          v.detail = {{"shards", {sa, sb}}, {"txs", {prev->first, tx}}};
          out.push_back(std::move(v));
        }
        prev = {tx, seq};
        prev_pos = it->second.first;
      }
    }
  }

  if (stats) {
    for (const auto& [s, text] : digest_input) stats->shard_digests[s] = fnv1a(text);
  }
  return out;
}

std::vector<Violation> check_liveness(const Trace& trace, std::optional<Time> horizon,
                                      AuditStats* stats) {
  struct Life {
    std::uint64_t submitted_seq = 0;
    ShardId sender{};
    bool xfer = false;
    bool otx = false;
    std::optional<std::uint32_t> recipient;
    bool processed = false;
    bool in_crosslink = false;
    bool ordered = false;
    std::set<std::uint32_t> executed;
    std::set<std::uint32_t> resolved;
    bool recipient_done = false;
    bool sender_committed = false;
    std::uint64_t last_seq = 0;
  };
  std::map<std::uint64_t, Life> life;
  for (const auto& ev : trace.events()) {
    if (ev.kind == EventKind::CrossLinkSent) {
      for (const auto& id : ev.detail.value("txs", Json::array())) {
        if (auto it = life.find(id.get<std::uint64_t>()); it != life.end()) it->second.in_crosslink = true;
      }
      continue;
    }
    if (!ev.subject.is_tx()) continue;
    const auto tx = ev.subject.a;
    if (ev.kind == EventKind::Submitted) {
      if (horizon && ev.time > *horizon) continue;
      Life l;
      l.submitted_seq = ev.seq;
      l.sender = ev.location;
      l.xfer = ev.detail.value("kind", std::string{}) == to_string(TxKind::CrossShardTransfer);
      l.otx = ev.detail.contains("entry");
      if (l.xfer) l.recipient = ev.detail.value("recipient_shard", std::uint32_t{0});
      life[tx] = std::move(l);
      continue;
    }
    auto it = life.find(tx);
    if (it == life.end()) continue;
    auto& l = it->second;
    l.last_seq = ev.seq;
    const auto s = value(ev.location);
    switch (ev.kind) {
      case EventKind::Processed: l.processed = true; break;
      case EventKind::Ordered: l.ordered = true; break;
      case EventKind::Executed: l.executed.insert(s); break;
      case EventKind::Committed:
      case EventKind::Aborted:
        l.resolved.insert(s);
        if (ev.kind == EventKind::Committed && ev.location == l.sender) l.sender_committed = true;
        if (l.recipient && s == *l.recipient && ev.detail.value("side", std::string{}) == "recipient") {
          l.recipient_done = true;
        }
        break;
      default: break;
    }
  }

  std::vector<Violation> out;
  for (const auto& [tx, l] : life) {
    const bool sender_done = l.resolved.count(value(l.sender)) != 0;
    const bool contracts_done =
        std::includes(l.resolved.begin(), l.resolved.end(), l.executed.begin(), l.executed.end());
    // A transfer aborted at the sender never reaches the recipient.
    const bool recipient_ok = !l.xfer || !l.sender_committed || l.recipient_done;
    if (sender_done && contracts_done && recipient_ok) continue;

    const char* stage = "Committed";
    if (!l.processed && !sender_done) {
      stage = "Processed";
    } else if (l.in_crosslink && !l.ordered) {
      stage = "Ordered";
    } else if (l.otx && l.executed.empty() && !sender_done) {
      stage = "Executed";
    }
    Violation v;
    v.kind = ViolationKind::LivenessStall;
    v.message = txs(tx) + " stuck before " + stage;
    v.evidence = {l.submitted_seq};
    if (l.last_seq) v.evidence.push_back(l.last_seq);
    v.detail = {{"tx", tx}, {"stage", stage}, {"sender_shard", value(l.sender)}};
    out.push_back(std::move(v));
  }
  if (stats) stats->txs_checked += life.size();
  return out;
}

std::vector<Violation> check_lemmas(const Trace& trace, AuditStats* stats) {
  struct ClInfo {
    Time ts = 0;
    std::optional<std::uint64_t> sent_seq;
    std::optional<std::uint64_t> cycle;
  };
  struct CycleInfo {
    std::uint64_t cycle = 0;
    std::uint64_t seq = 0;
    Time max_ts = 0;
  };
  std::map<std::pair<std::uint32_t, Height>, ClInfo> cls;
  std::vector<CycleInfo> cycles;
  std::map<std::uint32_t, Height> last_height;
  std::vector<Violation> out;

  for (const auto& ev : trace.events()) {
    if (ev.kind == EventKind::CrossLinkSent && ev.subject.kind == Subject::Kind::CrossLink) {
      auto& c = cls[{static_cast<std::uint32_t>(ev.subject.a), ev.subject.b}];
      c.ts = ev.detail.value("block_ts", Time{0});
      c.sent_seq = ev.seq;
      continue;
    }
    if (ev.kind != EventKind::Ordered || ev.subject.kind != Subject::Kind::Cycle) continue;

    CycleInfo ci;
    ci.cycle = ev.subject.a;
    ci.seq = ev.seq;
    for (const auto& cl : ev.detail.value("crosslinks", Json::array())) {
      const auto s = cl.at("shard").get<std::uint32_t>();
      const auto h = cl.at("height").get<Height>();
      const auto ts = cl.at("block_ts").get<Time>();
      ci.max_ts = std::max(ci.max_ts, ts);
      cls[{s, h}].cycle = cycles.size();
      auto& last = last_height[s];
      if (h != last + 1) {
        Violation v;
        v.kind = ViolationKind::GapInOrderedHeights;
        v.message = "shard " + std::to_string(s) + " ordered height " + std::to_string(h) +
                    " after " + std::to_string(last);
        v.evidence = {ev.seq};
        v.detail = {{"shard", s}, {"height", h}, {"previous", last}, {"cycle", ci.cycle}};
        out.push_back(std::move(v));
      }
      last = std::max(last, h);
    }

    const auto order = ev.detail.value("order", Json::array());
    std::map<std::pair<std::uint32_t, Height>, std::uint64_t> last_index;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto& e = order[i];
      const auto key = std::make_pair(e.at("shard").get<std::uint32_t>(), e.at("height").get<Height>());
      const auto idx = e.at("index").get<std::uint64_t>();
      if (auto it = last_index.find(key); it != last_index.end() && idx <= it->second) {
        Violation v;
        v.kind = ViolationKind::Lemma2Breach;
        v.message = "cycle " + std::to_string(ci.cycle) + " reorders transactions of one CrossLink";
        v.evidence = {ev.seq};
        v.detail = {{"cycle", ci.cycle}, {"position", i}, {"tx", e.at("tx")}};
        out.push_back(std::move(v));
      }
      last_index[key] = idx;
      if (i > 0 && e.at("key_ts").get<Time>() < order[i - 1].at("key_ts").get<Time>()) {
        Violation v;
        v.kind = ViolationKind::Lemma2Breach;
        v.message = "cycle " + std::to_string(ci.cycle) + " orders a later block before an earlier one";
        v.evidence = {ev.seq};
        v.detail = {{"cycle", ci.cycle},
                    {"position", i},
                    {"txs", {order[i - 1].at("tx"), e.at("tx")}}};
        out.push_back(std::move(v));
      }
    }
    if (!cycles.empty()) ci.max_ts = std::max(ci.max_ts, cycles.back().max_ts);
    cycles.push_back(ci);
  }

  // A CrossLink first ordered in cycle k (or never) must be newer than
  // everything ordered before k; the running maximum makes k-1 sufficient.
  for (const auto& [key, c] : cls) {
    if (!c.sent_seq && !c.cycle) continue;
    const std::size_t k = c.cycle ? *c.cycle : cycles.size();
    if (k == 0) continue;
    const auto& prev = cycles[k - 1];
    if (c.ts > prev.max_ts) continue;
    Violation v;
    v.kind = ViolationKind::Lemma1Breach;
    v.message = "CrossLink " + std::to_string(key.first) + "/" + std::to_string(key.second) +
                " with block_ts " + std::to_string(c.ts) + " was still in flight when cycle " +
                std::to_string(prev.cycle) + " ordered up to " + std::to_string(prev.max_ts);
    v.evidence = {prev.seq};
    if (c.sent_seq) v.evidence.push_back(*c.sent_seq);
    std::sort(v.evidence.begin(), v.evidence.end());
    v.detail = {{"shard", key.first}, {"height", key.second}, {"block_ts", c.ts}, {"cycle", prev.cycle}};
    out.push_back(std::move(v));
  }
  if (stats) stats->cycles_checked += cycles.size();
  return out;
}

std::size_t AuditReport::count(ViolationKind k) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; }));
}

Json AuditReport::to_json() const {
  auto vs = Json::array();
  for (const auto& v : violations) vs.push_back(v.to_json());
  auto digests = Json::object();
  for (const auto& [s, d] : stats.shard_digests) digests[std::to_string(s)] = d;
  return Json{{"violations", vs},
              {"assumptions", assumptions},
              {"stats",
               {{"pairs_checked", stats.pairs_checked},
                {"cycles_checked", stats.cycles_checked},
                {"txs_checked", stats.txs_checked},
                {"violations", violations.size()},
                {"shard_digests", digests}}}};
}

AuditReport run_audit(const Trace& trace, const AuditOptions& options) {
  AuditReport r;
  auto add = [&](std::vector<Violation> vs) {
    for (auto& v : vs) r.violations.push_back(std::move(v));
  };
  add(check_finalization_fairness(trace, options.contract, &r.stats));
  add(check_safety(trace, &r.stats));
  add(check_liveness(trace, options.horizon, &r.stats));
  add(check_lemmas(trace, &r.stats));
  r.assumptions = {
      "intra-shard consensus is abstract: each shard is one replica, so replica prefix "
      "consistency is represented by one commit-sequence digest per shard",
      "the beacon chain is honest",
      "commit order is compared only on shards that executed both transactions",
  };
  if (options.contract) r.assumptions.push_back("fairness checked on contract " + *options.contract + " only");
  return r;
}

}  // namespace haechi
