#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ciisim/attacks.hpp"
#include "ciisim/crypto/ec.hpp"
#include "ciisim/engine.hpp"
#include "ciisim/metrics_record.hpp"
#include "ciisim/protocol/channel.hpp"
#include "ciisim/protocol/messages.hpp"
#include "ciisim/protocol/trust.hpp"

namespace ciisim::protocol {

struct ProtocolConfig {
  int k_test = 20;
  double bootstrap_s = 2.0;  // test messages go out in the first half
  double aggregation_window_s = 1.0;
  double pmu_rate_hz = 30.0;
  double scada_mean_interval_s = 5.0;  // per MU sensor; 0 disables
  double intra_substation_latency_s = 0.001;
  double optical_latency_s = 0.001;
  double lan_latency_s = 0.0005;
  double drain_s = 3.0;  // sensing stops at duration, delivery continues
  bool retransmit_on_reroute = true;
  int max_hops = 64;
};

struct SimulationConfig {
  engine::RadioModel radio;
  engine::EnergyModel energy;
  ProtocolConfig protocol;
  crypto::CurveParams curve = crypto::secp256k1();
  double duration_s = 60.0;
  std::uint64_t seed = 1;
};

enum class TraceEv { kSend, kRecv, kDrop, kReject, kReroute };
enum class Link { kWireless, kOptical, kLan };
enum class DropCause { kBlackhole, kDeadBattery, kNoRoute, kTampered };

const char* trace_ev_name(TraceEv e);
const char* drop_cause_name(DropCause c);

/// For send/recv, src and dst are the hop endpoints; for drop they are the
/// node holding the packet and its intended next hop; for reject and
/// reroute they are the originator and the node acting on it.
struct TraceEvent {
  SimTime t = 0.0;
  TraceEv ev = TraceEv::kSend;
  std::uint64_t pkt = 0;
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  PacketKind kind = PacketKind::kTestMsg;
};

/// `t=<time> ev=<ev> pkt=<seq> src=<id> dst=<id> kind=<kind>`, no newline.
std::string format_trace(const TraceEvent& e);

struct GatewayState {
  NodeId id = kNoNode;
  NodeId rs = kNoNode;
  NodeId pdc = kNoNode;
  crypto::KeyPair keys;
  SharedSecret rs_secret{};
  SharedSecret pdc_secret{};
  std::vector<NodeId> relay_candidates;
  std::vector<NodeId> ehrn_candidates;
  std::map<NodeId, TrustRecord> relay_trust;
  std::map<NodeId, TrustRecord> ehrn_trust;
  std::set<NodeId> relay_excluded;
  std::set<NodeId> ehrn_excluded;
  NodeId head = kNoNode;      // SCADA cluster head
  NodeId ehrn_hop = kNoNode;  // PMU next hop
  int elections = 0;
};

struct SinkState {
  NodeId id = kNoNode;
  crypto::KeyPair keys;
  std::map<NodeId, SharedSecret> secrets;  // by gateway
  std::optional<crypto::Point> cc_public;
  std::vector<SensorReading> buffer;
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> test_tally;  // (gateway, probe)
  std::uint64_t aggregates_sent = 0;
};

struct AggregateLog {
  NodeId sink = kNoNode;
  SimTime window_start = 0.0;
  SimTime window_end = 0.0;
  std::vector<std::uint64_t> reading_ids;
  SimTime received_at = 0.0;
};

struct ServerState {
  NodeId id = kNoNode;
  std::optional<crypto::BigInt> private_key;
  std::vector<AggregateLog> log;
  std::uint64_t decrypt_failures = 0;
};

struct ReadingRecord {
  ReadingKind kind = ReadingKind::kScada;
  NodeId gateway = kNoNode;
  SimTime generated_at = 0.0;
  enum class State { kInFlight, kDelivered, kDropped } state = State::kInFlight;
  DropCause cause = DropCause::kNoRoute;
  SimTime delivered_at = 0.0;
};

/// One run of the monitoring protocol over a built topology.
class Simulation {
 public:
  using TraceSink = std::function<void(const TraceEvent&)>;
  using HopObserver =
      std::function<void(NodeId from, NodeId to, Link link, const Packet& p)>;

  Simulation(Topology topo, SimulationConfig cfg, attacks::AttackPlan plan = {});

  void set_trace(TraceSink sink) { trace_ = std::move(sink); }
  void set_hop_observer(HopObserver obs) { hop_observer_ = std::move(obs); }

  /// Key setup, key distribution, trust bootstrap and the sensing schedule.
  void start();
  void run_until(SimTime t);
  /// start() if needed, then run through duration plus drain.
  void run();

  /// Queues one SCADA sample from an MU sensor at time t (>= now).
  void inject_scada(NodeId mu_sensor, SimTime t);

  MetricsRecord metrics() const;

  SimTime now() const { return queue_.now(); }
  SimTime end_time() const { return cfg_.duration_s + cfg_.protocol.drain_s; }
  const Topology& topology() const { return topo_; }
  const SimulationConfig& config() const { return cfg_; }
  const attacks::AttackPlan& attack_plan() const { return plan_; }
  const GatewayState& gateway(NodeId id) const { return gateways_.at(id); }
  const SinkState& sink(NodeId id) const { return sinks_.at(id); }
  const ServerState& server(NodeId id) const { return servers_.at(id); }
  const std::vector<ReadingRecord>& readings() const { return readings_; }
  const engine::EnergyState& energy(NodeId id) const {
    return energy_.at(static_cast<std::size_t>(id));
  }
  const engine::RadioMesh& mesh() const { return mesh_; }
  bool alive(NodeId id);
  /// Plaintext reading carried by an in-flight data packet, if any.
  const SensorReading* carried_reading(std::uint64_t seq) const;

 private:
  // setup
  void setup_keys();
  void distribute_keys();
  void schedule_bootstrap();
  void finish_bootstrap();
  void schedule_sensing();
  void schedule_pmu_frame(NodeId pmu, std::uint64_t k);
  void schedule_flush(std::uint64_t k);

  // module 1 and 2
  void on_reading(NodeId gateway, SensorReading r);
  void gw_forward_scada(GatewayState& g, SensorReading r);
  void gw_forward_pmu(GatewayState& g, SensorReading r);
  NodeId elect_head(GatewayState& g);
  NodeId choose_ehrn(GatewayState& g);
  void handle_reroute(GatewayState& g, const Packet& req);

  // module 3
  void sink_receive(SinkState& s, NodeId from, Packet p);
  void flush_sink(SinkState& s, SimTime window_start, SimTime window_end);
  void server_receive(ServerState& srv, const Packet& p);

  // transport
  std::uint64_t next_seq() { return ++seq_; }
  void send_wireless(NodeId from, NodeId to, Packet p);
  void receive_wireless(NodeId at, NodeId from, Packet p);
  void forward(NodeId at, Packet p);
  NodeId next_hop(NodeId at, Packet& p);
  void send_optical(NodeId from, NodeId to, Link link, Packet p);
  void receive_optical(NodeId at, Packet p);
  std::vector<NodeId> ring_path(const std::vector<NodeId>& ring, NodeId from,
                                NodeId to) const;
  void drop(NodeId at, NodeId next, const Packet& p, DropCause cause);
  void emit(TraceEv ev, std::uint64_t pkt, NodeId src, NodeId dst, PacketKind kind);

  engine::EnergyState& settle(NodeId id);
  int connectivity(NodeId id);
  const std::vector<int>& hop_field(NodeId sink, Role cls);
  const DeployedNode& node(NodeId id) const {
    return topo_.nodes[static_cast<std::size_t>(id)];
  }
  void finish_reading(std::uint64_t reading_id, ReadingRecord::State state,
                      DropCause cause = DropCause::kNoRoute);

  Topology topo_;
  SimulationConfig cfg_;
  attacks::AttackPlan plan_;
  engine::EventQueue queue_;
  engine::RadioMesh mesh_;
  std::vector<engine::EnergyState> energy_;
  Rng key_rng_, scada_rng_, attack_rng_, seal_rng_;
  crypto::GlobalKey gbk_;
  crypto::KeyPair cc_keys_;

  std::map<NodeId, GatewayState> gateways_;
  std::map<NodeId, SinkState> sinks_;
  std::map<NodeId, ServerState> servers_;
  std::map<std::pair<NodeId, int>, std::vector<int>> hop_fields_;

  std::vector<ReadingRecord> readings_;
  std::unordered_map<std::uint64_t, SensorReading> inflight_;  // by packet seq
  std::uint64_t seq_ = 0;
  std::uint64_t tamper_rejections_ = 0;
  std::uint64_t reroutes_ = 0;
  std::uint64_t packets_dropped_ = 0;
  bool started_ = false;

  TraceSink trace_;
  HopObserver hop_observer_;
};

}  // namespace ciisim::protocol
