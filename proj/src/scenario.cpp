// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#include "ponvdba/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "ponvdba/errors.hpp"

namespace ponvdba {

std::string_view to_string(TimingMode m) {
  return m == TimingMode::kSimulated ? "simulated" : "wall_clock";
}

std::string_view to_string(ExecutionMode m) {
  return m == ExecutionMode::kSequential ? "sequential" : "concurrent";
}

namespace {

// Collects every problem instead of stopping at the first one.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) {
    errors.push_back(path + ": " + msg);
  }

  void allow_only(const YAML::Node& node, const std::string& path,
                  std::initializer_list<std::string_view> keys) {
    if (!node.IsMap()) return;
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        fail(join(path, key), "unknown key");
      }
    }
  }

  static std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }

  static std::string index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
  }

  std::optional<std::uint64_t> u64(const YAML::Node& map, std::string_view key,
                                   const std::string& path, bool required = false) {
    const auto node = map[std::string(key)];
    const auto p = join(path, key);
    if (!node.IsDefined() || node.IsNull()) {
      if (required) fail(p, "required");
      return std::nullopt;
    }
    // Accepts 8000000 as well as 8e6.
    try {
      return node.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
    }
    try {
      const double d = node.as<double>();
      if (std::isfinite(d) && d >= 0 && d == std::floor(d) && d < 1.8e19) {
        return static_cast<std::uint64_t>(d);
      }
    } catch (const YAML::Exception&) {
    }
    fail(p, "expected a non-negative integer");
    return std::nullopt;
  }

  std::optional<std::int64_t> i64(const YAML::Node& map, std::string_view key,
                                  const std::string& path) {
    const auto node = map[std::string(key)];
    if (!node.IsDefined() || node.IsNull()) return std::nullopt;
    try {
      return node.as<std::int64_t>();
    } catch (const YAML::Exception&) {
      fail(join(path, key), "expected an integer");
      return std::nullopt;
    }
  }

  std::optional<double> real(const YAML::Node& map, std::string_view key,
                             const std::string& path) {
    const auto node = map[std::string(key)];
    if (!node.IsDefined() || node.IsNull()) return std::nullopt;
    try {
      return node.as<double>();
    } catch (const YAML::Exception&) {
      fail(join(path, key), "expected a number");
      return std::nullopt;
    }
  }

  std::optional<bool> boolean(const YAML::Node& map, std::string_view key,
                              const std::string& path) {
    const auto node = map[std::string(key)];
    if (!node.IsDefined() || node.IsNull()) return std::nullopt;
    try {
      return node.as<bool>();
    } catch (const YAML::Exception&) {
      fail(join(path, key), "expected true or false");
      return std::nullopt;
    }
  }

  std::optional<std::string> text(const YAML::Node& map, std::string_view key,
                                  const std::string& path, bool required = false) {
    const auto node = map[std::string(key)];
    if (!node.IsDefined() || node.IsNull()) {
      if (required) fail(join(path, key), "required");
      return std::nullopt;
    }
    if (!node.IsScalar()) {
      fail(join(path, key), "expected a string");
      return std::nullopt;
    }
    return node.as<std::string>();
  }

  std::uint32_t u32(const YAML::Node& map, std::string_view key, const std::string& path,
                    std::uint32_t fallback, bool required = false) {
    const auto v = u64(map, key, path, required);
    if (!v) return fallback;
    if (*v > 0xFFFF'FFFFULL) {
      fail(join(path, key), "out of range");
      return fallback;
    }
    return static_cast<std::uint32_t>(*v);
  }
};

std::optional<TrafficClassKind> parse_class(std::string_view s) {
  if (s == "fixed") return TrafficClassKind::kFixed;
  if (s == "assured") return TrafficClassKind::kAssured;
  if (s == "best_effort") return TrafficClassKind::kBestEffort;
  return std::nullopt;
}

TrafficProfile read_profile(Reader& r, const YAML::Node& node, const std::string& path) {
  if (!node.IsDefined()) return CbrProfile{};
  if (!node.IsMap()) {
    r.fail(path, "expected a mapping");
    return CbrProfile{};
  }
  const auto type = r.text(node, "type", path, true).value_or("cbr");
  if (type == "cbr") {
    r.allow_only(node, path, {"type", "rate_bps", "packet_bytes"});
    return CbrProfile{r.u64(node, "rate_bps", path, true).value_or(0),
                      r.u32(node, "packet_bytes", path, 0)};
  }
  if (type == "poisson") {
    r.allow_only(node, path, {"type", "mean_rate_bps", "mean_packet_bytes"});
    PoissonProfile p{r.u64(node, "mean_rate_bps", path, true).value_or(0),
                     r.u32(node, "mean_packet_bytes", path, 1500)};
    if (p.mean_packet_bytes == 0) r.fail(Reader::join(path, "mean_packet_bytes"), "must be positive");
    return p;
  }
  if (type == "onoff") {
    r.allow_only(node, path, {"type", "rate_bps", "duty", "period_frames", "packet_bytes"});
    OnOffProfile p{r.u64(node, "rate_bps", path, true).value_or(0),
                   r.real(node, "duty", path).value_or(0.5),
                   r.u32(node, "period_frames", path, 8), r.u32(node, "packet_bytes", path, 0)};
    if (!(p.duty >= 0 && p.duty <= 1)) r.fail(Reader::join(path, "duty"), "must lie in [0, 1]");
    if (p.period_frames == 0) r.fail(Reader::join(path, "period_frames"), "must be positive");
    return p;
  }
  r.fail(Reader::join(path, "type"), "unknown traffic profile '" + type + "'");
  return CbrProfile{};
}

Scenario read_scenario(Reader& r, const YAML::Node& root) {
  Scenario sc;
  if (!root.IsMap()) {
    r.fail("<root>", "expected a mapping");
    return sc;
  }
  r.allow_only(root, "",
               {"schema_version", "name", "seed", "frames", "timing_mode", "execution",
                "output_dir", "export_dbru_trace", "histogram_bin_us", "clock", "guard_words",
                "staleness_frames", "merge", "slices", "onus"});

  if (const auto v = r.u64(root, "schema_version", "", true); v && *v != kScenarioSchemaVersion) {
    r.fail("schema_version", "unsupported version " + std::to_string(*v) + " (expected " +
                                 std::to_string(kScenarioSchemaVersion) + ")");
  }
  sc.name = r.text(root, "name", "").value_or("");
  sc.seed = r.u64(root, "seed", "").value_or(0);
  sc.frames = r.u64(root, "frames", "", true).value_or(0);
  sc.output_dir = r.text(root, "output_dir", "").value_or("");
  sc.export_dbru_trace = r.boolean(root, "export_dbru_trace", "").value_or(false);
  sc.histogram_bin_us = r.real(root, "histogram_bin_us", "").value_or(0.5);
  if (!(sc.histogram_bin_us > 0)) r.fail("histogram_bin_us", "must be positive");

  if (const auto t = r.text(root, "timing_mode", "")) {
    if (*t == "simulated") {
      sc.timing_mode = TimingMode::kSimulated;
    } else if (*t == "wall_clock") {
      sc.timing_mode = TimingMode::kWallClock;
    } else {
      r.fail("timing_mode", "expected simulated or wall_clock");
    }
  }
  if (const auto e = r.text(root, "execution", "")) {
    if (*e == "sequential") {
      sc.execution = ExecutionMode::kSequential;
    } else if (*e == "concurrent") {
      sc.execution = ExecutionMode::kConcurrent;
    } else {
      r.fail("execution", "expected sequential or concurrent");
    }
  }

  if (const auto clock = root["clock"]; clock.IsDefined()) {
    r.allow_only(clock, "clock", {"line_rate_bps", "frame_duration_ns"});
    const auto rate = r.u64(clock, "line_rate_bps", "clock").value_or(kXgsPonUpstreamRateBps);
    const auto dur = r.u64(clock, "frame_duration_ns", "clock").value_or(kXgsPonFrameNs);
    try {
      sc.clock = FrameClock(rate, dur);
    } catch (const Error& e) {
      r.fail("clock", e.what());
    }
  }

  sc.merge_policy.guard_words = r.u32(root, "guard_words", "", kDefaultGuardWords);
  sc.staleness_frames = r.u64(root, "staleness_frames", "").value_or(kDefaultStalenessFrames);

  if (const auto merge = root["merge"]; merge.IsDefined()) {
    r.allow_only(merge, "merge", {"surplus_distribution", "overrun_handling", "deadline_ns"});
    if (const auto s = r.text(merge, "surplus_distribution", "merge")) {
      if (const auto v = parse_surplus_distribution(*s)) {
        sc.merge_policy.surplus_distribution = *v;
      } else {
        r.fail("merge.surplus_distribution", "expected none, weighted_by_share or round_robin");
      }
    }
    if (const auto o = r.text(merge, "overrun_handling", "merge")) {
      if (const auto v = parse_overrun_handling(*o)) {
        sc.merge_policy.overrun_handling = *v;
      } else {
        r.fail("merge.overrun_handling", "expected clip_tail or reject_map");
      }
    }
    sc.deadline_ns = r.u64(merge, "deadline_ns", "merge").value_or(0);
  }

  const auto slices = root["slices"];
  if (!slices.IsDefined() || !slices.IsSequence()) {
    r.fail("slices", "required list");
  } else {
    for (std::size_t i = 0; i < slices.size(); ++i) {
      const auto node = slices[i];
      const auto path = Reader::index("slices", i);
      if (!node.IsMap()) {
        r.fail(path, "expected a mapping");
        continue;
      }
      r.allow_only(node, path,
                   {"id", "share_words", "surplus_eligible", "algorithm", "priority", "allocs"});
      SliceDescriptor s;
      s.slice_id = SliceId(r.u32(node, "id", path, 0, true));
      s.share_words = r.u32(node, "share_words", path, 0, true);
      s.surplus_eligible = r.boolean(node, "surplus_eligible", path).value_or(false);
      s.algorithm = r.text(node, "algorithm", path, true).value_or("");
      s.priority = static_cast<int>(r.i64(node, "priority", path).value_or(0));
      const auto allocs = node["allocs"];
      if (!allocs.IsDefined() || !allocs.IsSequence()) {
        r.fail(Reader::join(path, "allocs"), "required list");
      } else {
        for (std::size_t j = 0; j < allocs.size(); ++j) {
          const auto a = allocs[j];
          const auto ap = Reader::index(Reader::join(path, "allocs"), j);
          if (!a.IsMap()) {
            r.fail(ap, "expected a mapping");
            continue;
          }
          r.allow_only(a, ap, {"alloc_id", "onu_id", "class", "fixed_words", "weight"});
          AllocBinding b;
          b.alloc_id = AllocId(r.u32(a, "alloc_id", ap, 0, true));
          b.onu_id = OnuId(r.u32(a, "onu_id", ap, 0, true));
          const auto cls = r.text(a, "class", ap).value_or("best_effort");
          if (const auto k = parse_class(cls)) {
            b.traffic_class.kind = *k;
          } else {
            r.fail(Reader::join(ap, "class"), "expected fixed, assured or best_effort");
          }
          b.traffic_class.fixed_words = r.u32(a, "fixed_words", ap, 0);
          b.traffic_class.weight = r.u32(a, "weight", ap, 1);
          if (b.traffic_class.kind == TrafficClassKind::kFixed && b.traffic_class.fixed_words == 0) {
            r.fail(Reader::join(ap, "fixed_words"), "fixed class needs positive fixed_words");
          }
          if (b.traffic_class.kind != TrafficClassKind::kFixed && b.traffic_class.weight == 0) {
            r.fail(Reader::join(ap, "weight"), "must be positive");
          }
          s.allocs.push_back(b);
        }
      }
      sc.slices.push_back(std::move(s));
    }
  }

  const auto onus = root["onus"];
  if (!onus.IsDefined() || !onus.IsSequence()) {
    r.fail("onus", "required list");
  } else {
    for (std::size_t i = 0; i < onus.size(); ++i) {
      const auto node = onus[i];
      const auto path = Reader::index("onus", i);
      if (!node.IsMap()) {
        r.fail(path, "expected a mapping");
        continue;
      }
      r.allow_only(node, path, {"id", "buffer_bytes", "profile", "allocs"});
      OnuConfig onu;
      onu.onu_id = OnuId(r.u32(node, "id", path, 0, true));
      const auto buffer = r.u64(node, "buffer_bytes", path).value_or(kDefaultBufferBytes);
      const auto default_profile = node["profile"];
      const auto allocs = node["allocs"];
      if (!allocs.IsDefined() || !allocs.IsSequence()) {
        r.fail(Reader::join(path, "allocs"), "required list");
      } else {
        for (std::size_t j = 0; j < allocs.size(); ++j) {
          const auto a = allocs[j];
          const auto ap = Reader::index(Reader::join(path, "allocs"), j);
          if (!a.IsMap()) {
            r.fail(ap, "expected a mapping");
            continue;
          }
          r.allow_only(a, ap, {"alloc_id", "buffer_bytes", "profile"});
          QueueConfig q;
          q.alloc_id = AllocId(r.u32(a, "alloc_id", ap, 0, true));
          q.buffer_bytes = r.u64(a, "buffer_bytes", ap).value_or(buffer);
          const auto prof = a["profile"].IsDefined() ? a["profile"] : default_profile;
          const auto prof_path = a["profile"].IsDefined() ? Reader::join(ap, "profile")
                                                          : Reader::join(path, "profile");
          q.profile = read_profile(r, prof, prof_path);
          onu.queues.push_back(std::move(q));
        }
      }
      sc.onus.push_back(std::move(onu));
    }
  }
  return sc;
}

}  // namespace

std::vector<std::string> validate_scenario(const Scenario& sc, const AlgorithmRegistry& algorithms) {
  std::vector<std::string> out;
  auto fail = [&out](const std::string& path, const std::string& msg) {
    out.push_back(path + ": " + msg);
  };

  if (sc.slices.empty()) fail("slices", "at least one slice is required");

  std::map<AllocId, std::string> slice_alloc_path;
  std::map<AllocId, OnuId> slice_alloc_onu;
  for (std::size_t i = 0; i < sc.slices.size(); ++i) {
    const auto& s = sc.slices[i];
    const auto path = "slices[" + std::to_string(i) + "]";
    if (!algorithms.contains(s.algorithm)) {
      fail(path + ".algorithm", "unknown DBA algorithm '" + s.algorithm + "'");
    }
    for (std::size_t j = 0; j < s.allocs.size(); ++j) {
      const auto& a = s.allocs[j];
      const auto ap = path + ".allocs[" + std::to_string(j) + "]";
      const auto [it, inserted] = slice_alloc_path.emplace(a.alloc_id, ap);
      if (!inserted) {
        std::ostringstream msg;
        msg << "alloc_id " << a.alloc_id << " already assigned at " << it->second;
        fail(ap + ".alloc_id", msg.str());
        continue;
      }
      slice_alloc_onu.emplace(a.alloc_id, a.onu_id);
      if (a.traffic_class.kind == TrafficClassKind::kFixed &&
          a.traffic_class.fixed_words > s.share_words) {
        fail(ap + ".fixed_words", "exceeds the slice share");
      }
    }
  }

  std::set<OnuId> onu_ids;
  std::map<AllocId, std::string> onu_alloc_path;
  for (std::size_t i = 0; i < sc.onus.size(); ++i) {
    const auto& onu = sc.onus[i];
    const auto path = "onus[" + std::to_string(i) + "]";
    if (!onu_ids.insert(onu.onu_id).second) {
      std::ostringstream msg;
      msg << "onu id " << onu.onu_id << " declared twice";
      fail(path + ".id", msg.str());
    }
    for (std::size_t j = 0; j < onu.queues.size(); ++j) {
      const auto& q = onu.queues[j];
      const auto ap = path + ".allocs[" + std::to_string(j) + "]";
      const auto [it, inserted] = onu_alloc_path.emplace(q.alloc_id, ap);
      if (!inserted) {
        std::ostringstream msg;
        msg << "alloc_id " << q.alloc_id << " already hosted at " << it->second;
        fail(ap + ".alloc_id", msg.str());
        continue;
      }
      const auto owner = slice_alloc_onu.find(q.alloc_id);
      if (owner == slice_alloc_onu.end()) {
        std::ostringstream msg;
        msg << "alloc_id " << q.alloc_id << " is not owned by any slice";
        fail(ap + ".alloc_id", msg.str());
      } else if (owner->second != onu.onu_id) {
        std::ostringstream msg;
        msg << "alloc_id " << q.alloc_id << " is bound to onu " << owner->second
            << " in its slice but hosted by onu " << onu.onu_id;
        fail(ap + ".alloc_id", msg.str());
      }
    }
  }
  for (const auto& [alloc, path] : slice_alloc_path) {
    if (!onu_alloc_path.contains(alloc)) {
      std::ostringstream msg;
      msg << "alloc_id " << alloc << " is not hosted by any ONU";
      fail(path + ".alloc_id", msg.str());
    }
  }

  for (auto& p : SliceRegistry::problems(sc.slices, sc.clock, sc.guard_words())) {
    // Duplicate AllocIDs were already reported with their field paths.
    if (p.find("owned by both") != std::string::npos) continue;
    fail("slices", p);
  }
  return out;
}

Scenario parse_scenario(std::string_view yaml_text, const AlgorithmRegistry& algorithms) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("scenario is not valid YAML: ") + e.what());
  }
  Reader r;
  Scenario sc = read_scenario(r, root);
  // Semantic checks run even after field errors so one pass reports everything.
  for (auto& p : validate_scenario(sc, algorithms)) r.errors.push_back(std::move(p));
  if (!r.errors.empty()) throw ValidationError(std::move(r.errors));
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path, const AlgorithmRegistry& algorithms) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), algorithms);
}

}  // namespace ponvdba
