#include <gtest/gtest.h>

#include <future>
#include <thread>

#include "hlc/service/server.hpp"

using namespace hlc;
using nlohmann::json;

namespace {

ServerConfig small_config(std::uint64_t seed = 3) {
  ServerConfig c;
  c.seed = seed;
  c.pe.iterations = 10;
  c.window_seconds = 1.0;
  return c;
}

json body(const Response& r) { return json::parse(r.body); }

}  // namespace

TEST(Service, StateDescribesInitialTrial) {
  Service svc(small_config());
  const Response r = svc.get_state();
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.content_type, "application/json");
  const json j = body(r);
  EXPECT_EQ(j["trial_id"], 1);
  EXPECT_EQ(j["source"], "initial");
  EXPECT_EQ(j["theta"]["alpha"], 1.5);
  EXPECT_EQ(j["db_size"], 0);
  EXPECT_TRUE(j["posterior"]["beta"].contains("variance"));
}

TEST(Service, AppraisalValidation) {
  Service svc(small_config());
  EXPECT_EQ(svc.post_appraisal("not json").status, 400);
  EXPECT_EQ(svc.post_appraisal("{}").status, 400);
  EXPECT_EQ(svc.post_appraisal(R"({"polarity": 1})").status, 400);
  EXPECT_EQ(svc.post_appraisal(R"({"polarity": "maybe"})").status, 400);
  EXPECT_EQ(body(svc.get_state())["trial_id"], 1);
}

TEST(Service, PositiveThenNegative) {
  Service svc(small_config());
  Response r = svc.post_appraisal(R"({"polarity": "pos"})");
  ASSERT_EQ(r.status, 200);
  json j = body(r);
  EXPECT_EQ(j["db_appended"], true);
  EXPECT_EQ(j["new_trial"], false);
  EXPECT_EQ(j["db_size"], 1);

  r = svc.post_appraisal(R"({"polarity": "neg"})");
  ASSERT_EQ(r.status, 200);
  j = body(r);
  EXPECT_EQ(j["new_trial"], true);
  EXPECT_EQ(j["trial_id"], 2);
  EXPECT_EQ(j["source"], "sampled");

  const json h = body(svc.get_history());
  EXPECT_EQ(h["trials"].size(), 2u);
  EXPECT_EQ(h["appraisals"].size(), 2u);
  EXPECT_EQ(h["appraisals"][0]["polarity"], "pos");
}

TEST(Service, SameSeedSameThetaHistory) {
  auto run = [](std::uint64_t seed) {
    Service svc(small_config(seed));
    for (const char* p : {"neg", "pos", "neg", "neg", "pos", "neg"})
      svc.post_appraisal(std::string(R"({"polarity": ")") + p + "\"}");
    const json history = body(svc.get_history());
    json thetas = json::array();
    for (const auto& t : history["trials"]) thetas.push_back(t["theta"]);
    return thetas;
  };
  const json a = run(9), b = run(9), c = run(10);
  EXPECT_EQ(a.size(), 5u);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Service, AudioEndpointsServeWav) {
  Service svc(small_config());
  const Response orig = svc.get_audio_original();
  const Response cur = svc.get_audio_current();
  EXPECT_EQ(orig.content_type, "audio/wav");
  EXPECT_EQ(cur.status, 200);
  const WavData o = decode_wav(std::vector<unsigned char>(orig.body.begin(), orig.body.end()));
  const WavData c = decode_wav(std::vector<unsigned char>(cur.body.begin(), cur.body.end()));
  EXPECT_EQ(o.frames(), c.frames());
  EXPECT_NE(o.channels, c.channels);
  // a new trial renders new audio
  svc.post_appraisal(R"({"polarity": "neg"})");
  EXPECT_NE(svc.get_audio_current().body, cur.body);
}

TEST(Service, PosteriorDensitiesOnGrid) {
  Service svc(small_config());
  const json j = body(svc.get_posterior());
  for (const char* p : {"alpha", "beta", "obs_variance", "gain_precision"}) {
    ASSERT_TRUE(j.contains(p)) << p;
    EXPECT_EQ(j[p]["grid"].size(), static_cast<std::size_t>(Service::kGridPoints));
    EXPECT_EQ(j[p]["density"].size(), static_cast<std::size_t>(Service::kGridPoints));
    EXPECT_EQ(j[p]["prior_density"].size(), static_cast<std::size_t>(Service::kGridPoints));
    for (double d : j[p]["density"]) EXPECT_GE(d, 0.0);
  }
  // before any feedback the posterior is the prior
  EXPECT_EQ(j["alpha"]["density"], j["alpha"]["prior_density"]);
}

TEST(Service, BusyAgentGives409) {
  // the first appraisal blocks inside the clock until the second one has run
  std::promise<void> entered, release;
  auto entered_f = entered.get_future();
  auto release_f = release.get_future().share();
  ServerConfig cfg = small_config();
  int calls = 0;
  cfg.clock = [&] {
    if (++calls == 2) {
      entered.set_value();
      release_f.wait();
    }
    return std::string("2026-01-01T00:00:00Z");
  };
  Service svc(cfg);
  auto first = std::async(std::launch::async, [&] { return svc.post_appraisal(R"({"polarity": "neg"})"); });
  entered_f.wait();
  const Response busy = svc.post_appraisal(R"({"polarity": "neg"})");
  EXPECT_EQ(busy.status, 409);
  EXPECT_EQ(svc.get_state().status, 200);
  release.set_value();
  EXPECT_EQ(first.get().status, 200);
  EXPECT_EQ(body(svc.get_state())["trial_id"], 2);
}

TEST(Service, OverHttp) {
  Service svc(small_config());
  httplib::Server srv;
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  svc.attach(srv);
  const int port = srv.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);
  auto st = cli.Get("/api/state");
  ASSERT_TRUE(st);
  EXPECT_EQ(st->status, 200);
  EXPECT_EQ(st->get_header_value("Access-Control-Allow-Origin"), "*");
  auto bad = cli.Post("/api/appraisal", "{", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  auto ok = cli.Post("/api/appraisal", R"({"polarity":"neg"})", "application/json");
  ASSERT_TRUE(ok);
  EXPECT_EQ(json::parse(ok->body)["trial_id"], 2);
  for (const char* path : {"/api/audio/current", "/api/audio/original", "/api/history", "/api/posterior"}) {
    auto r = cli.Get(path);
    ASSERT_TRUE(r) << path;
    EXPECT_EQ(r->status, 200) << path;
  }
  srv.stop();
  t.join();
}
