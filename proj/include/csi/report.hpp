#pragma once

// Reports and the on-disk result cache.  Requires OpenSSL (libcrypto).

#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"
#include "qmc.hpp"

namespace csi {

using Json = nlohmann::ordered_json;

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

// Parameters that determine a result; worker count is deliberately absent.
inline Json params_json(const MCParams& p) {
  Json j;
  j["samples"] = p.samples;
  j["seed"] = p.seed;
  j["truncation"] = p.truncation;
  j["concentration"] = p.concentration;
  j["broad_weight"] = p.broad_weight;
  j["uniform_weight"] = p.uniform_weight;
  j["hotspot_weight"] = p.hotspot_weight;
  j["hotspot_threshold"] = p.hotspot_threshold;
  j["time_scale"] = p.time_scale;
  j["batches"] = p.batches;
  j["antithetic"] = p.antithetic;
  j["sampler"] = to_string(p.sampler);
  return j;
}

// Frozen schema: operation, curve_spec_digest, diagram, seed, N, L, value,
// stderr, diagnostics.
inline Json estimate_report(const std::string& operation, const std::string& curve_spec_digest,
                            const std::string& diagram, const MCParams& p, const IntegralEstimate& e) {
  Json j;
  j["operation"] = operation;
  j["curve_spec_digest"] = curve_spec_digest;
  j["diagram"] = diagram.empty() ? Json(nullptr) : Json(diagram);
  j["seed"] = e.seed;
  j["N"] = p.samples;
  j["L"] = e.truncation;
  j["value"] = e.value;
  j["stderr"] = e.std_error;
  Json d;
  d["n_effective"] = e.n_effective;
  d["evaluated"] = e.diagnostics.evaluated;
  d["rejected"] = e.diagnostics.rejected;
  d["rejection_fraction"] = e.diagnostics.evaluated
                                ? double(e.diagnostics.rejected) / double(e.diagnostics.evaluated)
                                : 0.0;
  d["max_abs_weighted"] = e.diagnostics.max_abs_weighted;
  d["batches"] = e.batch_means.size();
  d["sampler"] = to_string(p.sampler);
  for (auto& [k, v] : e.diagnostics.extra) d[k] = v;
  j["diagnostics"] = d;
  return j;
}

inline const char* kCsvHeader =
    "operation,curve_spec_digest,diagram,seed,N,L,value,stderr,n_effective,rejected,max_abs_weighted";

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::string csv_row(const Json& r) {
  auto str = [](const Json& v) { return v.is_null() ? std::string() : v.get<std::string>(); };
  const auto& d = r.at("diagnostics");
  std::ostringstream os;
  os << detail::csv_field(r.at("operation").get<std::string>()) << ','
     << str(r.at("curve_spec_digest")) << ',' << detail::csv_field(str(r.at("diagram"))) << ','
     << r.at("seed").get<std::uint64_t>() << ',' << r.at("N").get<std::uint64_t>() << ','
     << detail::num(r.at("L").get<double>()) << ',' << detail::num(r.at("value").get<double>()) << ','
     << detail::num(r.at("stderr").get<double>()) << ',' << d.at("n_effective").get<std::uint64_t>() << ','
     << d.at("rejected").get<std::uint64_t>() << ',' << detail::num(d.at("max_abs_weighted").get<double>());
  return os.str();
}

// Content-addressed cache of report documents, one JSON file per key.
class ResultCache {
 public:
  explicit ResultCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  // CSI_CACHE_DIR overrides the default; an explicit directory wins over both.
  static std::filesystem::path default_dir() {
    if (const char* e = std::getenv("CSI_CACHE_DIR"); e && *e) return e;
    if (const char* h = std::getenv("HOME"); h && *h) return std::filesystem::path(h) / ".cache" / "csi";
    return std::filesystem::temp_directory_path() / "csi-cache";
  }

  static std::string key(const std::string& operation, const std::string& curve_spec,
                         const std::string& diagram, const Json& params) {
    Json k;
    k["operation"] = operation;
    k["curve_spec"] = curve_spec;
    k["diagram"] = diagram;
    k["params"] = params;
    return sha256_hex(k.dump());
  }

  std::optional<Json> load(const std::string& key) const {
    std::ifstream in(dir_ / (key + ".json"));
    if (!in) return std::nullopt;
    try {
      return Json::parse(in);
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;  // a corrupt entry is a miss
    }
  }

  void store(const std::string& key, const Json& report) const {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    auto tmp = dir_ / (key + ".tmp");
    {
      std::ofstream out(tmp);
      if (!out) return;  // caching is best effort
      out << report.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, dir_ / (key + ".json"), ec);
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

}  // namespace csi
