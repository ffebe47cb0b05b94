// Copyright 2026 The true2f-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end for the simulator: a persistent token/browser/
// relying-party trio for init/register/auth flows, plus the scenario engine,
// crash campaigns and capacity reports. State lives in a directory of JSON
// and raw flash-image files; all randomness is seedable for replay.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "true2f/browser.hpp"
#include "true2f/harness.hpp"
#include "true2f/relying_party.hpp"
#include "true2f/token.hpp"

namespace fs = std::filesystem;
using namespace true2f;
using Json = nlohmann::ordered_json;

namespace {

struct Options {
  std::string state_dir = "true2f-state";
  std::string flash_image;
  std::string format = "text";
  uint64_t seed = 0;
  bool seeded = false;
};

std::unique_ptr<RandomSource> make_rng(const Options& opt,
                                       const std::string& label) {
  if (opt.seeded) {
    return std::make_unique<SeededRandom>(SeededRandom(opt.seed).fork(label));
  }
  return std::make_unique<SystemRandom>();
}

void emit(const Options& opt, const Json& report,
          const std::function<void(const Json&)>& text_printer) {
  if (opt.format == "json") {
    std::cout << report.dump(2) << "\n";
  } else {
    text_printer(report);
  }
}

std::optional<Bytes> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  Bytes data((std::istreambuf_iterator<char>(in)),
             std::istreambuf_iterator<char>());
  return data;
}

void write_file(const fs::path& path, std::span<const uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
}

// --- persistent session state ---

struct Session {
  std::unique_ptr<RandomSource> token_rng;
  std::unique_ptr<RandomSource> browser_rng;
  std::unique_ptr<RandomSource> rp_rng;
  std::unique_ptr<Token> token;
  std::unique_ptr<Browser> browser;
  std::map<std::string, std::vector<RelyingParty::AccountRecord>> rp_accounts;
  Channel channel;
};

fs::path flash_path(const Options& opt) {
  if (!opt.flash_image.empty()) return opt.flash_image;
  return fs::path(opt.state_dir) / "token-flash.bin";
}

void save_session(const Options& opt, Session& s) {
  fs::create_directories(opt.state_dir);
  auto snap = s.token->snapshot();
  if (!snap) throw std::runtime_error("token not initialized");

  Json token_json;
  token_json["x"] = to_hex(snap->x.to_bytes());
  token_json["sk_vrf"] = to_hex(snap->sk_vrf.to_bytes());
  token_json["mac_key"] = to_hex(snap->mac_key);
  write_file(fs::path(opt.state_dir) / "token.json",
             as_span(token_json.dump(2)));
  write_file(flash_path(opt), snap->flash_image);

  write_file(fs::path(opt.state_dir) / "browser.bin", s.browser->sync_export());

  Json rp_json = Json::object();
  for (const auto& [origin, accounts] : s.rp_accounts) {
    Json list = Json::array();
    for (const auto& a : accounts) {
      Json ja;
      ja["key_handle"] = to_hex(a.key_handle);
      ja["public_key"] = to_hex(a.public_key.encode());
      ja["last_counter"] = a.last_counter;
      ja["has_authenticated"] = a.has_authenticated;
      ja["clone_flag"] = a.clone_flag;
      list.push_back(ja);
    }
    rp_json[origin] = list;
  }
  write_file(fs::path(opt.state_dir) / "rp.json", as_span(rp_json.dump(2)));
}

std::optional<Session> load_session(const Options& opt) {
  Session s;
  s.token_rng = make_rng(opt, "token");
  s.browser_rng = make_rng(opt, "browser");
  s.rp_rng = make_rng(opt, "rp");

  auto token_file = read_file(fs::path(opt.state_dir) / "token.json");
  auto flash_file = read_file(flash_path(opt));
  auto browser_file = read_file(fs::path(opt.state_dir) / "browser.bin");
  if (!token_file || !flash_file || !browser_file) return std::nullopt;

  Json token_json =
      Json::parse(token_file->begin(), token_file->end(), nullptr, false);
  if (token_json.is_discarded()) return std::nullopt;
  auto x_bytes = from_hex(token_json.value("x", ""));
  auto vrf_bytes = from_hex(token_json.value("sk_vrf", ""));
  auto mac_bytes = from_hex(token_json.value("mac_key", ""));
  if (!x_bytes || !vrf_bytes || !mac_bytes || mac_bytes->size() != 32) {
    return std::nullopt;
  }
  auto x = Scalar::from_bytes(*x_bytes);
  auto sk_vrf = Scalar::from_bytes(*vrf_bytes);
  if (!x || !sk_vrf) return std::nullopt;
  Token::Snapshot snap;
  snap.x = *x;
  snap.sk_vrf = *sk_vrf;
  std::memcpy(snap.mac_key.data(), mac_bytes->data(), 32);
  snap.flash_image = *flash_file;
  s.token = Token::restore(*s.token_rng, snap);
  if (!s.token) return std::nullopt;

  auto browser = Browser::sync_import(*browser_file, *s.browser_rng);
  if (!browser) return std::nullopt;
  s.browser = std::make_unique<Browser>(*browser);

  auto rp_file = read_file(fs::path(opt.state_dir) / "rp.json");
  if (rp_file) {
    Json rp_json =
        Json::parse(rp_file->begin(), rp_file->end(), nullptr, false);
    if (rp_json.is_discarded() || !rp_json.is_object()) return std::nullopt;
    for (auto& [origin, list] : rp_json.items()) {
      for (auto& ja : list) {
        RelyingParty::AccountRecord a;
        auto kh = from_hex(ja.value("key_handle", ""));
        auto pk = from_hex(ja.value("public_key", ""));
        if (!kh || kh->size() != 32 || !pk) return std::nullopt;
        std::memcpy(a.key_handle.data(), kh->data(), 32);
        auto point = Point::decode(*pk);
        if (!point) return std::nullopt;
        a.public_key = *point;
        a.last_counter = ja.value("last_counter", uint64_t{0});
        a.has_authenticated = ja.value("has_authenticated", false);
        a.clone_flag = ja.value("clone_flag", false);
        s.rp_accounts[origin].push_back(a);
      }
    }
  }
  return s;
}

int cmd_init(const Options& opt) {
  Session s;
  s.token_rng = make_rng(opt, "token");
  s.browser_rng = make_rng(opt, "browser");
  s.rp_rng = make_rng(opt, "rp");
  s.token = std::make_unique<Token>(*s.token_rng);
  s.browser = std::make_unique<Browser>(*s.browser_rng);
  if (!s.browser->initialize(*s.token, s.channel)) {
    std::cerr << "initialization failed\n";
    return 1;
  }
  save_session(opt, s);
  Json report;
  report["state_dir"] = opt.state_dir;
  report["flash_image"] = flash_path(opt).string();
  report["mpk_x"] = to_hex(s.browser->mpk().big_x.encode());
  report["mpk_vrf"] = to_hex(s.browser->mpk().pk_vrf.encode());
  emit(opt, report, [](const Json& r) {
    std::cout << "initialized token + browser\n"
              << "  master key:  " << r["mpk_x"].get<std::string>() << "\n"
              << "  vrf key:     " << r["mpk_vrf"].get<std::string>() << "\n"
              << "  flash image: " << r["flash_image"].get<std::string>()
              << "\n";
  });
  return 0;
}

int cmd_register(const Options& opt, const std::string& origin) {
  auto s = load_session(opt);
  if (!s) {
    std::cerr << "no state at " << opt.state_dir << " (run init first)\n";
    return 1;
  }
  RelyingParty rp(origin, *s->rp_rng);
  for (const auto& a : s->rp_accounts[origin]) rp.add_account(a);
  Bytes32 challenge = rp.new_challenge();
  BrowserError err = BrowserError::kNone;
  auto reg = s->browser->register_identity(*s->token, s->channel, origin,
                                           challenge, &err);
  if (!reg) {
    std::cerr << "registration failed: " << to_string(err) << "\n";
    return 1;
  }
  auto account = rp.register_account(reg->wire_response);
  if (!account) {
    std::cerr << "relying party rejected the registration\n";
    return 1;
  }
  s->rp_accounts[origin].clear();
  for (size_t i = 0; i < rp.account_count(); i++) {
    s->rp_accounts[origin].push_back(rp.account(i));
  }
  save_session(opt, *s);

  Json report;
  report["origin"] = origin;
  report["key_handle"] = to_hex(reg->id);
  report["public_key"] = to_hex(reg->pk_id.encode());
  report["registrations"] = s->browser->registration_count();
  report["warning"] = reg->warning;
  emit(opt, report, [](const Json& r) {
    std::cout << "registered at " << r["origin"].get<std::string>() << "\n"
              << "  key handle: " << r["key_handle"].get<std::string>() << "\n"
              << "  public key: " << r["public_key"].get<std::string>() << "\n";
    if (r["warning"].get<bool>()) {
      std::cout << "  warning: identity capacity reached; further "
                   "registrations weaken fingerprinting protection\n";
    }
  });
  return 0;
}

int cmd_auth(const Options& opt, const std::string& origin,
             const std::string& handle_hex, bool no_presence) {
  auto s = load_session(opt);
  if (!s) {
    std::cerr << "no state at " << opt.state_dir << " (run init first)\n";
    return 1;
  }
  auto handle_bytes = from_hex(handle_hex);
  if (!handle_bytes || handle_bytes->size() != 32) {
    std::cerr << "--handle must be 64 hex characters\n";
    return 1;
  }
  Bytes32 handle;
  std::memcpy(handle.data(), handle_bytes->data(), 32);

  RelyingParty rp(origin, *s->rp_rng);
  for (const auto& a : s->rp_accounts[origin]) rp.add_account(a);
  auto account = rp.find_account(handle);
  if (!account) {
    std::cerr << "unknown key handle at this origin\n";
    return 1;
  }
  Bytes32 challenge = rp.new_challenge();
  BrowserError err = BrowserError::kNone;
  auto auth = s->browser->authenticate(*s->token, s->channel, origin,
                                       challenge, handle, !no_presence, &err);
  Json report;
  report["origin"] = origin;
  report["key_handle"] = handle_hex;
  if (!auth) {
    report["outcome"] = std::string("bot:") + to_string(err);
    save_session(opt, *s);
    emit(opt, report, [](const Json& r) {
      std::cout << "authentication failed: " << r["outcome"].get<std::string>()
                << "\n";
    });
    return 1;
  }
  auto outcome = rp.authenticate(*account, auth->wire_response, challenge);
  const char* outcome_str = "malformed";
  switch (outcome) {
    case RelyingParty::AuthOutcome::kAccept:
      outcome_str = "accept";
      break;
    case RelyingParty::AuthOutcome::kRejectSig:
      outcome_str = "reject-sig";
      break;
    case RelyingParty::AuthOutcome::kRejectCounter:
      outcome_str = "reject-counter";
      break;
    case RelyingParty::AuthOutcome::kMalformed:
      break;
  }
  report["outcome"] = outcome_str;
  report["counter"] = auth->counter;
  report["signature"] = to_hex(auth->signature.to_bytes());

  s->rp_accounts[origin].clear();
  for (size_t i = 0; i < rp.account_count(); i++) {
    s->rp_accounts[origin].push_back(rp.account(i));
  }
  save_session(opt, *s);
  emit(opt, report, [](const Json& r) {
    std::cout << "outcome: " << r["outcome"].get<std::string>()
              << "  counter: " << r["counter"].get<uint64_t>() << "\n";
  });
  return outcome == RelyingParty::AuthOutcome::kAccept ? 0 : 1;
}

int cmd_scenario(const Options& opt, const std::string& name, size_t origins,
                 size_t auths, size_t abort_at) {
  using namespace harness;
  uint64_t seed = opt.seeded ? opt.seed : 1;
  Json report;
  if (name == "global-counter-clone" || name == "per-identity-clone") {
    CloneReport r = run_clone_scenario(name == "global-counter-clone", seed);
    report = r.to_json();
    report["scenario"] = name;
    report["seed"] = seed;
  } else if (name == "fingerprint-global" ||
             name == "fingerprint-per-identity") {
    FingerprintReport r = run_fingerprint_scenario(
        name == "fingerprint-global", auths == 0 ? 1000 : auths, seed);
    report = r.to_json();
    report["scenario"] = name;
    report["seed"] = seed;
  } else {
    auto variant = variant_from_string(name);
    if (!variant) {
      std::cerr << "unknown scenario: " << name << "\n"
                << "known: honest fixed-nonce biased-keygen wrong-pk "
                   "counter-desync selective-abort global-counter-clone "
                   "per-identity-clone fingerprint-global "
                   "fingerprint-per-identity\n";
      return 1;
    }
    Scenario s = honest_scenario(origins == 0 ? 2 : origins,
                                 auths == 0 ? 20 : auths);
    s.name = name;
    s.variant = *variant;
    s.abort_at = abort_at;
    switch (*variant) {
      case TokenVariant::kHonest:
        break;
      case TokenVariant::kFixedNonce:
      case TokenVariant::kWrongNonce:
        s.expectation = "first authentication aborts; rest short-circuit";
        break;
      case TokenVariant::kBiasedKeygen:
        s.expectation = "all accepted; outputs stay audit-clean";
        break;
      case TokenVariant::kWrongPk:
        s.expectation = "first registration aborts; rest short-circuit";
        break;
      case TokenVariant::kCounterDesync:
        s.expectation = "first authentication aborts; rest short-circuit";
        break;
      case TokenVariant::kGlobalCounter:
        s.expectation = "all accepted; counters shared across identities";
        break;
      case TokenVariant::kSelectiveAbort:
        s.expectation = "one refusal at the chosen index; rest short-circuit";
        break;
    }
    if (*variant == TokenVariant::kSelectiveAbort && abort_at == 0) {
      s.abort_at = s.script.size() / 2;
    }
    if (*variant == TokenVariant::kGlobalCounter) {
      s.browser_global_counter = true;
    }
    report = run_scenario(s, seed).to_json();
  }
  emit(opt, report, [](const Json& r) { std::cout << r.dump(2) << "\n"; });
  return 0;
}

int cmd_crash_campaign(const Options& opt, size_t ops, size_t ids,
                       size_t stride) {
  uint64_t seed = opt.seeded ? opt.seed : 1;
  auto report = harness::run_crash_campaign(ops, ids, seed, stride);
  Json j = report.to_json();
  j["seed"] = seed;
  emit(opt, j, [](const Json& r) {
    std::cout << "crash campaign: " << r["crash_points"].get<uint64_t>()
              << " crash points, " << r["violations"].get<uint64_t>()
              << " violations\n";
  });
  return report.violations == 0 && report.control_matches_oracle ? 0 : 1;
}

int cmd_capacity(const Options& opt, int budget) {
  FlashConfig config;
  if (budget > 0) config.erase_budget = budget;
  std::optional<FlashSim> flash;
  if (!opt.flash_image.empty()) {
    auto image = read_file(opt.flash_image);
    if (!image) {
      std::cerr << "cannot read flash image " << opt.flash_image << "\n";
      return 1;
    }
    flash = FlashSim::deserialize(*image, config);
    if (!flash || flash->num_pages() != kCounterPages) {
      std::cerr << "not a 3-page flash image\n";
      return 1;
    }
  } else {
    flash.emplace(kCounterPages, config);
  }
  CounterStore store = opt.flash_image.empty() ? CounterStore::init(*flash)
                                               : CounterStore::recover(*flash);
  CapacityReport cap = store.capacity();
  Json report;
  report["erase_budget"] = config.erase_budget;
  report["erases_used"] = flash->erase_count(kLogPage);
  report["worst_case_remaining"] = cap.worst_case_remaining;
  report["best_case_remaining"] = cap.best_case_remaining;
  report["table_identities"] = store.table_size();
  report["overflow_counter"] = store.overflow();
  emit(opt, report, [](const Json& r) {
    std::cout << "capacity: worst case "
              << r["worst_case_remaining"].get<uint64_t>()
              << " increments, best case "
              << r["best_case_remaining"].get<uint64_t>() << "\n";
  });
  return 0;
}

int cmd_stats(const Options& opt) {
  auto s = load_session(opt);
  if (!s) {
    std::cerr << "no state at " << opt.state_dir << "\n";
    return 1;
  }
  Json report;
  report["registrations"] = s->browser->registration_count();
  report["token_failed"] = s->browser->token_failed();
  size_t accounts = 0;
  Json origins = Json::object();
  for (const auto& [origin, list] : s->rp_accounts) {
    Json jl = Json::array();
    for (const auto& a : list) {
      Json ja;
      ja["key_handle"] = to_hex(a.key_handle);
      ja["last_counter"] = a.last_counter;
      ja["clone_flag"] = a.clone_flag;
      jl.push_back(ja);
      accounts++;
    }
    origins[origin] = jl;
  }
  report["accounts"] = accounts;
  report["origins"] = origins;
  emit(opt, report, [](const Json& r) {
    std::cout << "registrations: " << r["registrations"].get<uint64_t>()
              << "\naccounts:      " << r["accounts"].get<uint64_t>()
              << "\ntoken failed:  "
              << (r["token_failed"].get<bool>() ? "yes" : "no") << "\n";
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"true2f: backdoor-resistant U2F token/browser simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  Options opt;
  app.add_option("--state", opt.state_dir, "State directory");
  app.add_option("--flash-image", opt.flash_image,
                 "Raw 6144-byte token flash image path");
  app.add_option("--format", opt.format, "Output format: text|json")
      ->check(CLI::IsMember({"text", "json"}));
  auto* seed_opt =
      app.add_option("--seed", opt.seed, "Deterministic randomness seed");

  auto* init = app.add_subcommand("init", "Initialize token and browser");

  std::string origin, handle;
  bool no_presence = false;
  auto* reg = app.add_subcommand("register", "Register at an origin");
  reg->add_option("--origin", origin, "Relying-party origin")->required();

  auto* auth = app.add_subcommand("auth", "Authenticate at an origin");
  auth->add_option("--origin", origin, "Relying-party origin")->required();
  auth->add_option("--handle", handle, "Key handle (64 hex chars)")->required();
  auth->add_flag("--no-presence", no_presence,
                 "Relying party did not require user presence");

  std::string scenario_name;
  size_t origins_count = 0, auths_count = 0, abort_at = 0;
  auto* scenario = app.add_subcommand("scenario", "Run a named scenario");
  scenario->add_option("name", scenario_name, "Scenario name")->required();
  scenario->add_option("--origins", origins_count, "Simulated origins");
  scenario->add_option("--auths", auths_count, "Authentication count");
  scenario->add_option("--abort-at", abort_at,
                       "Selective-abort request index (1-based)");

  size_t ops = 500, ids = 40, stride = 1;
  auto* crash = app.add_subcommand(
      "crash-campaign", "Crash-injection sweep over a counter trace");
  crash->add_option("--ops", ops, "Trace length");
  crash->add_option("--ids", ids, "Distinct identities in the trace");
  crash->add_option("--stride", stride, "Test every Nth crash point");

  int budget = 0;
  auto* capacity = app.add_subcommand("capacity", "Counter capacity report");
  capacity->add_option("--budget", budget, "Erase budget override");

  auto* stats = app.add_subcommand("stats", "Session statistics");

  CLI11_PARSE(app, argc, argv);
  opt.seeded = seed_opt->count() > 0;

  try {
    if (init->parsed()) return cmd_init(opt);
    if (reg->parsed()) return cmd_register(opt, origin);
    if (auth->parsed()) return cmd_auth(opt, origin, handle, no_presence);
    if (scenario->parsed()) {
      return cmd_scenario(opt, scenario_name, origins_count, auths_count,
                          abort_at);
    }
    if (crash->parsed()) return cmd_crash_campaign(opt, ops, ids, stride);
    if (capacity->parsed()) return cmd_capacity(opt, budget);
    if (stats->parsed()) return cmd_stats(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
