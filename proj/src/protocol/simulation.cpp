#include "ciisim/protocol/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ciisim/crypto/pke.hpp"

namespace ciisim::protocol {

namespace {

constexpr std::uint64_t kStreamKeys = 101;
constexpr std::uint64_t kStreamScada = 102;
constexpr std::uint64_t kStreamAttack = 103;
constexpr std::uint64_t kStreamSeal = 104;

constexpr int kUnreached = std::numeric_limits<int>::max();

bool is_sink(Role r) { return r == Role::kRegionalSink || r == Role::kPdc; }

}  // namespace

const char* trace_ev_name(TraceEv e) {
  switch (e) {
    case TraceEv::kSend: return "send";
    case TraceEv::kRecv: return "recv";
    case TraceEv::kDrop: return "drop";
    case TraceEv::kReject: return "reject";
    case TraceEv::kReroute: return "reroute";
  }
  return "?";
}

const char* drop_cause_name(DropCause c) {
  switch (c) {
    case DropCause::kBlackhole: return "blackhole";
    case DropCause::kDeadBattery: return "dead_battery";
    case DropCause::kNoRoute: return "no_route";
    case DropCause::kTampered: return "tampered";
  }
  return "?";
}

std::string format_trace(const TraceEvent& e) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "t=%.9f ev=%s pkt=%llu src=%d dst=%d kind=%s", e.t,
                trace_ev_name(e.ev), static_cast<unsigned long long>(e.pkt), e.src,
                e.dst, kind_name(e.kind));
  return buf;
}

Simulation::Simulation(Topology topo, SimulationConfig cfg, attacks::AttackPlan plan)
    : topo_(std::move(topo)),
      cfg_(std::move(cfg)),
      plan_(std::move(plan)),
      mesh_(topo_.nodes, cfg_.radio),
      key_rng_(stream_seed(cfg_.seed, kStreamKeys)),
      scada_rng_(stream_seed(cfg_.seed, kStreamScada)),
      attack_rng_(stream_seed(cfg_.seed, kStreamAttack)),
      seal_rng_(stream_seed(cfg_.seed, kStreamSeal)) {
  if (!(cfg_.duration_s > 0.0)) throw std::invalid_argument("duration must be positive");
  if (cfg_.protocol.k_test < 1) throw std::invalid_argument("k_test must be at least 1");
  if (!(cfg_.protocol.aggregation_window_s > 0.0) || !(cfg_.protocol.pmu_rate_hz > 0.0))
    throw std::invalid_argument("window and PMU rate must be positive");
  if (plan_.behavior.empty()) plan_.behavior.resize(topo_.nodes.size());
  if (plan_.behavior.size() != topo_.nodes.size())
    throw std::invalid_argument("attack plan does not match the topology");
  energy_.reserve(topo_.nodes.size());
  for (const auto& n : topo_.nodes)
    energy_.push_back(engine::EnergyState::for_node(n, cfg_.energy));
}

bool Simulation::alive(NodeId id) { return settle(id).alive(); }

engine::EnergyState& Simulation::settle(NodeId id) {
  auto& e = energy_[static_cast<std::size_t>(id)];
  if (e.rechargeable && now() > e.last_recharge) {
    engine::recharge(e, cfg_.energy, now() - e.last_recharge);
    e.last_recharge = now();
  }
  return e;
}

int Simulation::connectivity(NodeId id) {
  int n = 0;
  for (NodeId other : mesh_.in_range(id))
    if (alive(other)) ++n;
  return n;
}

const SensorReading* Simulation::carried_reading(std::uint64_t seq) const {
  auto it = inflight_.find(seq);
  return it == inflight_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------- setup

void Simulation::start() {
  if (started_) return;
  started_ = true;
  setup_keys();
  distribute_keys();
  schedule_bootstrap();
  schedule_sensing();
  schedule_flush(1);
}

void Simulation::run_until(SimTime t) {
  start();
  queue_.run_until(t);
}

void Simulation::run() { run_until(end_time()); }

void Simulation::setup_keys() {
  const auto& curve = cfg_.curve;
  Bytes gbk(32);
  for (auto& b : gbk) b = static_cast<std::uint8_t>(key_rng_());
  gbk_ = crypto::GlobalKey(std::move(gbk));

  cc_keys_ = crypto::keypair_generate(curve, key_rng_);
  servers_[topo_.main_cc_server] = ServerState{topo_.main_cc_server, cc_keys_.private_key, {}, 0};
  servers_[topo_.backup_cc_server] = ServerState{topo_.backup_cc_server, std::nullopt, {}, 0};

  for (const auto& region : topo_.regions)
    for (NodeId id : {topo_.rs_of.at(region.id), topo_.pdc_of.at(region.id)}) {
      SinkState s;
      s.id = id;
      s.keys = crypto::keypair_generate(curve, key_rng_);
      sinks_[id] = std::move(s);
    }

  std::set<SubstationId> with_pmu;
  for (const auto& n : topo_.nodes)
    if (n.role == Role::kPmuSensor) with_pmu.insert(n.substation);

  for (const auto& [sub, gw] : topo_.gateway_of) {
    GatewayState g;
    g.id = gw;
    const RegionId region = topo_.region_of.at(sub);
    g.rs = topo_.rs_of.at(region);
    g.pdc = topo_.pdc_of.at(region);
    g.keys = crypto::keypair_generate(curve, key_rng_);

    // ECDH handshake, computed on both ends.
    auto handshake = [&](NodeId sink_id, SharedSecret& mine) {
      SinkState& s = sinks_.at(sink_id);
      mine = crypto::ecdh_shared(curve, g.keys.private_key, s.keys.public_key);
      const SharedSecret theirs = crypto::ecdh_shared(curve, s.keys.private_key, g.keys.public_key);
      if (theirs != mine) throw std::logic_error("ECDH disagreement");
      s.secrets[gw] = theirs;
    };
    handshake(g.rs, g.rs_secret);
    if (with_pmu.count(sub)) handshake(g.pdc, g.pdc_secret);

    for (NodeId n : mesh_.in_range(gw)) {
      if (node(n).role == Role::kRelayNode) g.relay_candidates.push_back(n);
      if (node(n).role == Role::kEhrn && with_pmu.count(sub)) g.ehrn_candidates.push_back(n);
    }
    gateways_[gw] = std::move(g);
  }
}

void Simulation::distribute_keys() {
  const auto& curve = cfg_.curve;
  auto launch = [&](std::vector<NodeId> route, Bytes body) {
    Packet p;
    p.seq = next_seq();
    p.src = topo_.main_cc_server;
    p.dst = route.back();
    p.kind = PacketKind::kKeyDistribution;
    p.sent_at = now();
    p.body = std::move(body);
    p.route = std::move(route);
    p.route_pos = 1;
    const NodeId first = p.route.front();
    send_optical(topo_.main_cc_server, first, Link::kLan, std::move(p));
  };
  const Bytes pub = crypto::encode_point(curve, cc_keys_.public_key);
  for (const auto* ring : {&topo_.rs_ring, &topo_.pdc_ring}) {
    // main CC gateway, then every sink on the ring
    std::vector<NodeId> route(ring->begin(), ring->end() - 1);
    if (route.size() > 1) launch(route, pub);
  }
  launch({topo_.main_cc_gateway, topo_.backup_cc_gateway, topo_.backup_cc_server},
         crypto::encode_scalar(curve, cc_keys_.private_key));
}

void Simulation::schedule_bootstrap() {
  const auto& pc = cfg_.protocol;
  const double window = 0.5 * pc.bootstrap_s;
  for (auto& [gw, g] : gateways_) {
    auto probe_all = [&](const std::vector<NodeId>& candidates, NodeId sink,
                         std::map<NodeId, TrustRecord>& records) {
      if (candidates.empty()) return;
      const std::size_t total = candidates.size() * static_cast<std::size_t>(pc.k_test);
      const double spacing = window / static_cast<double>(total);
      for (NodeId c : candidates) records[c].node = c;
      for (std::size_t m = 0; m < total; ++m) {
        const NodeId c = candidates[m % candidates.size()];
        const NodeId from = gw;
        queue_.schedule(static_cast<double>(m) * spacing, [this, from, c, sink] {
          Packet p;
          p.seq = next_seq();
          p.src = from;
          p.dst = sink;
          p.kind = PacketKind::kTestMsg;
          p.probe = c;
          p.sent_at = now();
          p.ttl = cfg_.protocol.max_hops;
          GatewayState& gs = gateways_.at(from);
          auto& rec = node(sink).role == Role::kPdc ? gs.ehrn_trust : gs.relay_trust;
          ++rec[c].msgs_sent;
          send_wireless(from, c, std::move(p));
        });
      }
    };
    probe_all(g.relay_candidates, g.rs, g.relay_trust);
    probe_all(g.ehrn_candidates, g.pdc, g.ehrn_trust);
  }
  queue_.schedule(pc.bootstrap_s, [this] { finish_bootstrap(); });
}

void Simulation::finish_bootstrap() {
  for (auto& [gw, g] : gateways_) {
    // Sinks report their tallies to the gateways.
    const SinkState& rs = sinks_.at(g.rs);
    for (auto& [c, rec] : g.relay_trust) {
      auto it = rs.test_tally.find({gw, c});
      rec.msgs_delivered = it == rs.test_tally.end() ? 0 : it->second;
    }
    const SinkState& pdc = sinks_.at(g.pdc);
    for (auto& [c, rec] : g.ehrn_trust) {
      auto it = pdc.test_tally.find({gw, c});
      rec.msgs_delivered = it == pdc.test_tally.end() ? 0 : it->second;
    }
    try {
      elect_head(g);
    } catch (const RouteUnavailable&) {
      g.head = kNoNode;
    }
    if (!g.ehrn_candidates.empty()) g.ehrn_hop = choose_ehrn(g);
  }
}

void Simulation::schedule_sensing() {
  const auto& pc = cfg_.protocol;
  const double t0 = pc.bootstrap_s;
  if (pc.scada_mean_interval_s > 0.0) {
    std::exponential_distribution<double> gap(1.0 / pc.scada_mean_interval_s);
    for (const auto& n : topo_.nodes) {
      if (n.role != Role::kMuSensor) continue;
      for (double t = t0 + gap(scada_rng_); t < cfg_.duration_s; t += gap(scada_rng_))
        inject_scada(n.id, t);
    }
  }
  for (const auto& n : topo_.nodes)
    if (n.role == Role::kPmuSensor) schedule_pmu_frame(n.id, 0);
}

void Simulation::inject_scada(NodeId mu_sensor, SimTime t) {
  const DeployedNode& n = node(mu_sensor);
  if (n.role != Role::kMuSensor) throw std::invalid_argument("not an MU sensor");
  const NodeId gw = topo_.gateway_of.at(n.substation);
  queue_.schedule(t, [this, mu_sensor, gw] {
    const DeployedNode& s = node(mu_sensor);
    auto r = sense(Sensor{s.id, s.role, s.bus, true}, now(), readings_.size());
    if (!r) return;
    readings_.push_back(ReadingRecord{r->kind, gw, r->timestamp});
    queue_.schedule_in(cfg_.protocol.intra_substation_latency_s,
                       [this, gw, r = std::move(*r)] { on_reading(gw, r); });
  });
}

void Simulation::schedule_pmu_frame(NodeId pmu, std::uint64_t k) {
  const SimTime t = pmu_frame_time(cfg_.protocol.bootstrap_s, cfg_.protocol.pmu_rate_hz, k);
  if (t >= cfg_.duration_s) return;
  queue_.schedule(t, [this, pmu, k] {
    const DeployedNode& s = node(pmu);
    const NodeId gw = topo_.gateway_of.at(s.substation);
    auto r = sense(Sensor{s.id, s.role, s.bus, true}, now(), readings_.size());
    if (r) {
      readings_.push_back(ReadingRecord{r->kind, gw, r->timestamp});
      queue_.schedule_in(cfg_.protocol.intra_substation_latency_s,
                         [this, gw, r = std::move(*r)] { on_reading(gw, r); });
    }
    schedule_pmu_frame(pmu, k + 1);
  });
}

void Simulation::schedule_flush(std::uint64_t k) {
  const double w = cfg_.protocol.aggregation_window_s;
  const SimTime t = static_cast<double>(k) * w;
  if (t > end_time()) return;
  queue_.schedule(t, [this, k, w, t] {
    for (auto& [id, s] : sinks_) flush_sink(s, t - w, t);
    schedule_flush(k + 1);
  });
}

// ------------------------------------------------------ modules 1 and 2

void Simulation::on_reading(NodeId gateway, SensorReading r) {
  GatewayState& g = gateways_.at(gateway);
  if (r.kind == ReadingKind::kScada)
    gw_forward_scada(g, std::move(r));
  else
    gw_forward_pmu(g, std::move(r));
}

NodeId Simulation::elect_head(GatewayState& g) {
  std::vector<ScoredCandidate> scored;
  for (NodeId c : g.relay_candidates) {
    if (g.relay_excluded.count(c) || !alive(c)) continue;
    NodeProtocolState st;
    st.battery_pct = settle(c).percent();
    auto it = g.relay_trust.find(c);
    st.trust = it == g.relay_trust.end() ? 0.0 : it->second.trust_value();
    st.connectivity = connectivity(c);
    scored.push_back({c, candidate_value(st)});
  }
  g.head = kNoNode;
  g.head = elect_cluster_head(scored);
  ++g.elections;
  return g.head;
}

NodeId Simulation::choose_ehrn(GatewayState& g) {
  const Position target = node(g.pdc).position;
  NodeId best = kNoNode;
  double best_d = 0.0;
  for (NodeId c : g.ehrn_candidates) {
    if (g.ehrn_excluded.count(c) || !alive(c)) continue;
    auto it = g.ehrn_trust.find(c);
    if (it == g.ehrn_trust.end() || !(it->second.trust_value() > 0.0)) continue;
    const double d = distance_km(node(c).position, target);
    if (best == kNoNode || d < best_d) {
      best = c;
      best_d = d;
    }
  }
  return best;
}

void Simulation::gw_forward_scada(GatewayState& g, SensorReading r) {
  Packet p;
  p.seq = next_seq();
  p.src = g.id;
  p.dst = g.rs;
  p.kind = PacketKind::kScada;
  p.sent_at = now();
  p.ttl = cfg_.protocol.max_hops;
  const SealedReading sealed = seal_reading(g.rs_secret, gbk_, p.seq, r);
  p.ciphertext = sealed.ciphertext;
  p.tag = sealed.tag;
  inflight_.emplace(p.seq, std::move(r));

  if (g.head == kNoNode || !alive(g.head)) {
    try {
      elect_head(g);
    } catch (const RouteUnavailable&) {
      drop(g.id, g.rs, p, DropCause::kNoRoute);
      return;
    }
  }
  send_wireless(g.id, g.head, std::move(p));
}

void Simulation::gw_forward_pmu(GatewayState& g, SensorReading r) {
  Packet p;
  p.seq = next_seq();
  p.src = g.id;
  p.dst = g.pdc;
  p.kind = PacketKind::kSynchrophasor;
  p.sent_at = now();
  p.ttl = cfg_.protocol.max_hops;
  const SealedReading sealed = seal_reading(g.pdc_secret, gbk_, p.seq, r);
  p.ciphertext = sealed.ciphertext;
  p.tag = sealed.tag;
  inflight_.emplace(p.seq, std::move(r));

  if (g.ehrn_hop == kNoNode || !alive(g.ehrn_hop)) g.ehrn_hop = choose_ehrn(g);
  if (g.ehrn_hop == kNoNode) {
    drop(g.id, g.pdc, p, DropCause::kNoRoute);
    return;
  }
  send_wireless(g.id, g.ehrn_hop, std::move(p));
}

void Simulation::handle_reroute(GatewayState& g, const Packet& req) {
  ++reroutes_;
  emit(TraceEv::kReroute, req.rejected_seq, req.src, g.id, req.rejected_kind);
  const bool scada = req.rejected_kind == PacketKind::kScada;
  auto& records = scada ? g.relay_trust : g.ehrn_trust;
  for (NodeId n : req.failed_path) {
    records[n].node = n;
    ++records[n].msgs_sent;
  }
  const NodeId implicated = req.failed_path.empty() ? kNoNode : req.failed_path.front();

  auto pending = inflight_.find(req.rejected_seq);
  if (scada) {
    if (implicated != kNoNode) g.relay_excluded.insert(implicated);
    if (g.head == implicated) {
      try {
        elect_head(g);
      } catch (const RouteUnavailable&) {
        g.head = kNoNode;
      }
    }
    if (pending == inflight_.end()) return;
    SensorReading r = std::move(pending->second);
    inflight_.erase(pending);
    if (cfg_.protocol.retransmit_on_reroute)
      gw_forward_scada(g, std::move(r));
    else
      finish_reading(r.id, ReadingRecord::State::kDropped, DropCause::kTampered);
  } else {
    if (implicated != kNoNode) g.ehrn_excluded.insert(implicated);
    if (g.ehrn_hop == implicated) g.ehrn_hop = choose_ehrn(g);
    if (pending == inflight_.end()) return;
    finish_reading(pending->second.id, ReadingRecord::State::kDropped, DropCause::kTampered);
    inflight_.erase(pending);
  }
}

// ------------------------------------------------------------ module 3

void Simulation::sink_receive(SinkState& s, NodeId /*from*/, Packet p) {
  switch (p.kind) {
    case PacketKind::kTestMsg:
      ++s.test_tally[{p.src, p.probe}];
      return;
    case PacketKind::kScada:
    case PacketKind::kSynchrophasor:
      break;
    default:
      return;
  }
  VerifyResult res = verify_and_decrypt(s.secrets, gbk_, p);
  switch (res.status) {
    case VerifyStatus::kAccepted:
      inflight_.erase(p.seq);
      s.buffer.push_back(std::move(*res.reading));
      return;
    case VerifyStatus::kUnknownSender:
      drop(s.id, s.id, p, DropCause::kNoRoute);
      return;
    case VerifyStatus::kTagMismatch:
    case VerifyStatus::kMalformed:
      break;
  }
  ++tamper_rejections_;
  emit(TraceEv::kReject, p.seq, p.src, s.id, p.kind);

  Packet req;
  req.seq = next_seq();
  req.src = s.id;
  req.dst = p.src;
  req.kind = PacketKind::kRerouteRequest;
  req.sent_at = now();
  req.rejected_seq = p.seq;
  req.rejected_kind = p.kind;
  req.failed_path = p.path;
  req.route.assign(p.path.rbegin(), p.path.rend());
  req.route.push_back(p.src);
  req.route_pos = 1;
  req.ttl = cfg_.protocol.max_hops;
  const NodeId first = req.route.front();
  send_wireless(s.id, first, std::move(req));
}

std::vector<NodeId> Simulation::ring_path(const std::vector<NodeId>& ring, NodeId from,
                                          NodeId to) const {
  const auto n = static_cast<long>(ring.size());
  const long i = std::find(ring.begin(), ring.end(), from) - ring.begin();
  const long j = std::find(ring.begin(), ring.end(), to) - ring.begin();
  if (i == n || j == n) throw std::logic_error("node not on ring");
  const long cw = ((j - i) % n + n) % n;
  const long ccw = ((i - j) % n + n) % n;
  const long step = cw <= ccw ? 1 : -1;
  std::vector<NodeId> out;
  for (long k = i; k != j;) {
    k = ((k + step) % n + n) % n;
    out.push_back(ring[static_cast<std::size_t>(k)]);
  }
  return out;
}

void Simulation::flush_sink(SinkState& s, SimTime window_start, SimTime window_end) {
  if (s.buffer.empty() || !s.cc_public) return;
  auto agg = aggregate(s.id, std::move(s.buffer), window_start, window_end);
  s.buffer.clear();
  Bytes sealed = crypto::pk_encrypt(cfg_.curve, *s.cc_public, seal_rng_, serialize_aggregate(*agg));
  ++s.aggregates_sent;

  const auto& ring = node(s.id).role == Role::kPdc ? topo_.pdc_ring : topo_.rs_ring;
  const std::pair<NodeId, NodeId> targets[] = {
      {topo_.main_cc_gateway, topo_.main_cc_server},
      {topo_.backup_cc_gateway, topo_.backup_cc_server}};
  for (auto [gw, server] : targets) {
    Packet p;
    p.seq = next_seq();
    p.src = s.id;
    p.dst = server;
    p.kind = PacketKind::kAggregateToCc;
    p.sent_at = now();
    p.ciphertext.assign(sealed.begin(), sealed.end() - crypto::kDigestBytes);
    AuthTag tag{};
    std::copy(sealed.end() - crypto::kDigestBytes, sealed.end(), tag.begin());
    p.tag = tag;
    p.route = ring_path(ring, s.id, gw);
    p.route.push_back(server);
    p.route_pos = 1;
    const NodeId first = p.route.front();
    send_optical(s.id, first, Link::kOptical, std::move(p));
  }
}

void Simulation::server_receive(ServerState& srv, const Packet& p) {
  if (!srv.private_key) {
    ++srv.decrypt_failures;
    drop(srv.id, srv.id, p, DropCause::kNoRoute);
    return;
  }
  Bytes sealed = p.ciphertext;
  if (p.tag) sealed.insert(sealed.end(), p.tag->begin(), p.tag->end());
  AggregatePayload agg;
  try {
    agg = parse_aggregate(crypto::pk_decrypt(cfg_.curve, *srv.private_key, sealed));
  } catch (const std::exception&) {
    ++srv.decrypt_failures;
    drop(srv.id, srv.id, p, DropCause::kTampered);
    return;
  }
  AggregateLog entry{agg.sink, agg.window_start, agg.window_end, {}, now()};
  for (const auto& r : agg.readings) {
    entry.reading_ids.push_back(r.id);
    if (srv.id == topo_.main_cc_server)
      finish_reading(r.id, ReadingRecord::State::kDelivered);
  }
  srv.log.push_back(std::move(entry));
}

// ------------------------------------------------------------ transport

void Simulation::emit(TraceEv ev, std::uint64_t pkt, NodeId src, NodeId dst,
                      PacketKind kind) {
  if (trace_) trace_(TraceEvent{now(), ev, pkt, src, dst, kind});
}

void Simulation::finish_reading(std::uint64_t reading_id, ReadingRecord::State state,
                                DropCause cause) {
  ReadingRecord& rec = readings_.at(reading_id);
  if (rec.state != ReadingRecord::State::kInFlight) return;
  rec.state = state;
  rec.cause = cause;
  if (state == ReadingRecord::State::kDelivered) rec.delivered_at = now();
}

void Simulation::drop(NodeId at, NodeId next, const Packet& p, DropCause cause) {
  ++packets_dropped_;
  emit(TraceEv::kDrop, p.seq, at, next, p.kind);
  std::uint64_t key = 0;
  DropCause reading_cause = cause;
  if (p.kind == PacketKind::kScada || p.kind == PacketKind::kSynchrophasor) {
    key = p.seq;
  } else if (p.kind == PacketKind::kRerouteRequest) {
    key = p.rejected_seq;
    reading_cause = DropCause::kTampered;
  } else {
    return;
  }
  auto it = inflight_.find(key);
  if (it == inflight_.end()) return;
  finish_reading(it->second.id, ReadingRecord::State::kDropped, reading_cause);
  inflight_.erase(it);
}

void Simulation::send_wireless(NodeId from, NodeId to, Packet p) {
  auto& tx = settle(from);
  if (!tx.alive()) {
    drop(from, to, p, DropCause::kDeadBattery);
    return;
  }
  const std::size_t bits = packet_bits(p);
  if (!tx.unbounded) {
    const double d = distance_m(node(from).position, node(to).position);
    const bool enough = tx.battery_j >= cfg_.energy.tx_cost(bits, d);
    engine::consume_energy(tx, cfg_.energy, engine::RadioAction::kTransmit, bits, d);
    if (!enough) {
      drop(from, to, p, DropCause::kDeadBattery);
      return;
    }
  }
  emit(TraceEv::kSend, p.seq, from, to, p.kind);
  if (hop_observer_) hop_observer_(from, to, Link::kWireless, p);
  queue_.schedule_in(cfg_.radio.hop_latency(bits), [this, from, to, p = std::move(p)] {
    receive_wireless(to, from, p);
  });
}

void Simulation::receive_wireless(NodeId at, NodeId from, Packet p) {
  auto& rx = settle(at);
  if (!rx.alive()) {
    drop(from, at, p, DropCause::kDeadBattery);
    return;
  }
  if (!rx.unbounded) {
    const std::size_t bits = packet_bits(p);
    const bool enough = rx.battery_j >= cfg_.energy.rx_cost(bits);
    engine::consume_energy(rx, cfg_.energy, engine::RadioAction::kReceive, bits, 0.0);
    if (!enough) {
      drop(from, at, p, DropCause::kDeadBattery);
      return;
    }
  }
  emit(TraceEv::kRecv, p.seq, from, at, p.kind);
  const Role role = node(at).role;
  if (is_wireless(role)) {
    forward(at, std::move(p));
  } else if (is_sink(role)) {
    sink_receive(sinks_.at(at), from, std::move(p));
  } else if (role == Role::kGateway && p.kind == PacketKind::kRerouteRequest) {
    handle_reroute(gateways_.at(at), p);
  }
}

void Simulation::forward(NodeId at, Packet p) {
  const attacks::NodeBehavior& b = plan_.of(at);
  if (b.kind != attacks::Behavior::kHonest && now() >= plan_.activation_time) {
    switch (b.kind) {
      case attacks::Behavior::kBlackhole:
        drop(at, p.dst, p, DropCause::kBlackhole);
        return;
      case attacks::Behavior::kGrayhole:
        if (std::bernoulli_distribution(b.drop_probability)(attack_rng_)) {
          drop(at, p.dst, p, DropCause::kBlackhole);
          return;
        }
        break;
      case attacks::Behavior::kTamper:
        attacks::tamper(p, attack_rng_);
        break;
      case attacks::Behavior::kHonest:
        break;
    }
  }
  p.path.push_back(at);
  if (--p.ttl <= 0) {
    drop(at, p.dst, p, DropCause::kNoRoute);
    return;
  }
  const NodeId next = next_hop(at, p);
  if (next == kNoNode) {
    drop(at, p.dst, p, DropCause::kNoRoute);
    return;
  }
  send_wireless(at, next, std::move(p));
}

NodeId Simulation::next_hop(NodeId at, Packet& p) {
  if (p.kind == PacketKind::kRerouteRequest) {
    if (p.route_pos >= p.route.size()) return kNoNode;
    return p.route[p.route_pos++];
  }
  const DeployedNode& here = node(at);
  const DeployedNode& dest = node(p.dst);
  if (mesh_.within_range(here, dest)) return p.dst;

  const Role cls = dest.role == Role::kPdc ? Role::kEhrn : Role::kRelayNode;
  auto visited = [&](NodeId n) {
    return std::find(p.path.begin(), p.path.end(), n) != p.path.end();
  };

  if (!p.void_mode) {
    NodeId best = kNoNode;
    double best_d = distance_km(here.position, dest.position);
    for (NodeId n : mesh_.in_range(at)) {
      if (node(n).role != cls || visited(n) || !alive(n)) continue;
      const double d = distance_km(node(n).position, dest.position);
      if (d < best_d) {
        best = n;
        best_d = d;
      }
    }
    if (best != kNoNode) return best;
    p.void_mode = true;  // greedy void: fall back to hop-count descent
  }

  const auto& hops = hop_field(p.dst, cls);
  NodeId best = kNoNode;
  int best_h = kUnreached;
  double best_d = 0.0;
  for (NodeId n : mesh_.in_range(at)) {
    if (node(n).role != cls || visited(n) || !alive(n)) continue;
    const int h = hops[static_cast<std::size_t>(n)];
    if (h == kUnreached) continue;
    const double d = distance_km(node(n).position, dest.position);
    if (h < best_h || (h == best_h && d < best_d)) {
      best = n;
      best_h = h;
      best_d = d;
    }
  }
  return best;
}

const std::vector<int>& Simulation::hop_field(NodeId sink, Role cls) {
  const auto key = std::make_pair(sink, static_cast<int>(cls));
  auto it = hop_fields_.find(key);
  if (it != hop_fields_.end()) return it->second;
  std::vector<int> hops(topo_.nodes.size(), kUnreached);
  std::vector<NodeId> frontier;
  for (NodeId n : mesh_.in_range(sink))
    if (node(n).role == cls) {
      hops[static_cast<std::size_t>(n)] = 1;
      frontier.push_back(n);
    }
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    const NodeId u = frontier[i];
    for (NodeId v : mesh_.in_range(u))
      if (node(v).role == cls && hops[static_cast<std::size_t>(v)] == kUnreached) {
        hops[static_cast<std::size_t>(v)] = hops[static_cast<std::size_t>(u)] + 1;
        frontier.push_back(v);
      }
  }
  return hop_fields_.emplace(key, std::move(hops)).first->second;
}

void Simulation::send_optical(NodeId from, NodeId to, Link link, Packet p) {
  emit(TraceEv::kSend, p.seq, from, to, p.kind);
  if (hop_observer_) hop_observer_(from, to, link, p);
  const double latency =
      link == Link::kLan ? cfg_.protocol.lan_latency_s : cfg_.protocol.optical_latency_s;
  queue_.schedule_in(latency, [this, from, to, p = std::move(p)] {
    emit(TraceEv::kRecv, p.seq, from, to, p.kind);
    receive_optical(to, p);
  });
}

void Simulation::receive_optical(NodeId at, Packet p) {
  const Role role = node(at).role;
  if (p.kind == PacketKind::kKeyDistribution) {
    if (is_sink(role))
      sinks_.at(at).cc_public = crypto::decode_point(cfg_.curve, p.body);
    else if (at == topo_.backup_cc_server)
      servers_.at(at).private_key = crypto::decode_scalar(p.body);
  }
  if (p.route_pos < p.route.size()) {
    const NodeId next = p.route[p.route_pos++];
    const bool lan = role == Role::kCcServer || node(next).role == Role::kCcServer;
    send_optical(at, next, lan ? Link::kLan : Link::kOptical, std::move(p));
    return;
  }
  if (p.kind == PacketKind::kAggregateToCc && role == Role::kCcServer)
    server_receive(servers_.at(at), p);
}

// -------------------------------------------------------------- metrics

MetricsRecord Simulation::metrics() const {
  MetricsRecord m;
  std::vector<double> delays;
  double pmu_delay_sum = 0.0;
  for (const auto& r : readings_) {
    const bool scada = r.kind == ReadingKind::kScada;
    if (!scada) {
      ++m.pmu_generated;
      if (r.state == ReadingRecord::State::kDelivered) {
        ++m.pmu_delivered;
        pmu_delay_sum += r.delivered_at - r.generated_at;
      } else if (r.state == ReadingRecord::State::kDropped) {
        ++m.pmu_dropped;
      }
      continue;
    }
    ++m.generated;
    switch (r.state) {
      case ReadingRecord::State::kDelivered:
        ++m.delivered;
        delays.push_back(r.delivered_at - r.generated_at);
        break;
      case ReadingRecord::State::kInFlight:
        ++m.in_flight;
        break;
      case ReadingRecord::State::kDropped:
        switch (r.cause) {
          case DropCause::kBlackhole: ++m.drops_blackhole; break;
          case DropCause::kDeadBattery: ++m.drops_dead_battery; break;
          case DropCause::kNoRoute: ++m.drops_no_route; break;
          case DropCause::kTampered: ++m.drops_tampered; break;
        }
        break;
    }
  }
  if (m.generated) m.delivery_ratio = double(m.delivered) / double(m.generated);
  if (!delays.empty()) {
    double sum = 0.0;
    for (double d : delays) sum += d;
    m.delay_mean_s = sum / double(delays.size());
    std::sort(delays.begin(), delays.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * double(delays.size())));
    m.delay_p95_s = delays[std::max<std::size_t>(rank, 1) - 1];
  }
  if (m.pmu_delivered) m.pmu_delay_mean_s = pmu_delay_sum / double(m.pmu_delivered);
  m.tamper_rejections = tamper_rejections_;
  m.reroutes = reroutes_;
  m.packets_dropped = packets_dropped_;
  for (std::size_t i = 0; i < energy_.size(); ++i) {
    if (!is_wireless(topo_.nodes[i].role)) continue;
    engine::EnergyState e = energy_[i];
    m.energy_consumed_j += e.consumed_j;
    if (e.rechargeable && now() > e.last_recharge)
      engine::recharge(e, cfg_.energy, now() - e.last_recharge);
    if (!e.alive()) ++m.dead_nodes;
  }
  return m;
}

}  // namespace ciisim::protocol
