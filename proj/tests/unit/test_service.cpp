#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "crowdteach/error.hpp"
#include "crowdteach/service.hpp"

using namespace crowdteach;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("crowdteach-svc-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    [[nodiscard]] std::string file(const std::string& name) const { return (path / name).string(); }
};

/// 1-D thresholds; the target is x > 0. Twelve teaching and twelve test points.
TeachingProblem line_problem() {
    TeachingProblem p;
    p.alpha = 2.0;
    for (double t : {-1.0, 0.0, 1.0}) p.hypothesis_class.hypotheses.push_back(Hypothesis{{1.0}, -t});
    p.hypothesis_class.prior = {0.3, 0.4, 0.3};
    p.hypothesis_class.target_index = 1;
    std::vector<Example> test;
    for (int i = 0; i < 12; ++i) {
        const double x = -2.75 + 0.5 * i;
        const Label y = x > 0 ? Label::positive : Label::negative;
        char id[8];
        std::snprintf(id, sizeof id, "t%02d", i);
        p.teaching_set.push_back(Example{id, {x}, y, std::string("img/") + id + ".png"});
        std::snprintf(id, sizeof id, "s%02d", i);
        test.push_back(Example{id, {x + 0.1}, x + 0.1 > 0 ? Label::positive : Label::negative, std::nullopt});
    }
    p.test_set = std::move(test);
    return p;
}

ServiceConfig config_with_group() {
    ServiceConfig c;
    c.problem = line_problem();
    c.groups["strict"] = {"t05", "t06", "t04", "t07", "t03", "t08", "t02", "t09", "t01", "t10"};
    c.test_len = 10;
    return c;
}

Label truth_of(const TeachingProblem& p, const std::string& id) {
    for (const auto& e : p.teaching_set) {
        if (e.id == id) return e.label;
    }
    for (const auto& e : *p.test_set) {
        if (e.id == id) return e.label;
    }
    FAIL("unknown id " << id);
    return Label::positive;
}

Label flip(Label y) { return y == Label::positive ? Label::negative : Label::positive; }

/// Answers every item; the first `wrong_tests` test items get the wrong label.
std::vector<std::string> run_session(SessionStore& store, const std::string& sid, std::size_t wrong_tests) {
    std::vector<std::string> served;
    std::size_t tests_seen = 0;
    for (;;) {
        const ServedItem item = store.next_item(sid);
        if (item.done) break;
        served.push_back(item.item_id);
        Label answer = truth_of(store.config().problem, item.item_id);
        if (item.phase == Phase::test && tests_seen++ < wrong_tests) answer = flip(answer);
        (void)store.submit_answer(sid, item.item_id, answer);
    }
    return served;
}

ServiceError::Kind error_kind(auto&& fn) {
    try {
        fn();
    } catch (const ServiceError& e) {
        return e.kind();
    }
    FAIL("no ServiceError raised");
    return ServiceError::Kind::bad_request;
}

}  // namespace

TEST_CASE("error kinds map to HTTP statuses") {
    CHECK(ServiceError(ServiceError::Kind::bad_request, "x").status() == 400);
    CHECK(ServiceError(ServiceError::Kind::not_found, "x").status() == 404);
    CHECK(ServiceError(ServiceError::Kind::conflict, "x").status() == 409);
    CHECK(ServiceError(ServiceError::Kind::not_done, "x").status() == 409);
    CHECK(to_string(Phase::teach) == "teach");
    CHECK(to_string(Phase::test) == "test");
    CHECK(to_string(Phase::done) == "done");
}

TEST_CASE("configuration validation") {
    ServiceConfig c = config_with_group();
    c.groups["bad"] = {"t01", "nope"};
    CHECK_THROWS_AS(SessionStore{c}, ValidationError);

    c = config_with_group();
    c.groups["dup"] = {"t01", "t01"};
    CHECK_THROWS_AS(SessionStore{c}, ValidationError);

    c = config_with_group();
    c.test_len = 13;
    CHECK_THROWS_AS(SessionStore{c}, ValidationError);

    c = config_with_group();
    c.groups["leak"] = {"s01"};
    CHECK_THROWS_AS(SessionStore{c}, ValidationError);

    const SessionStore store(config_with_group());
    CHECK(store.group_names() == std::vector<std::string>{"none", "strict"});
    CHECK(store.group_sequence("none").empty());
    CHECK(store.group_sequence("strict") == config_with_group().groups["strict"]);
}

TEST_CASE("sessions serve the group's sequence then the shared test block") {
    SessionStore store(config_with_group());
    const auto a = store.create_session("strict");
    const auto b = store.create_session("strict");
    CHECK(a.session_id != b.session_id);
    CHECK(a.session_id.size() == 32);
    CHECK(a.n_teach == 10);
    CHECK(a.n_test == 10);

    const ServedItem first = store.next_item(a.session_id);
    CHECK(store.next_item(a.session_id).item_id == first.item_id);
    CHECK(first.phase == Phase::teach);
    CHECK(first.position == 0);
    CHECK(first.total == 20);
    REQUIRE(first.asset.has_value());
    CHECK(*first.asset == "img/t05.png");
    CHECK_FALSE(first.features.has_value());

    const auto served_a = run_session(store, a.session_id, 0);
    const auto served_b = run_session(store, b.session_id, 0);
    CHECK(served_a == served_b);
    std::vector<std::string> expected = config_with_group().groups["strict"];
    for (int i = 0; i < 10; ++i) {
        char id[8];
        std::snprintf(id, sizeof id, "s%02d", i);
        expected.emplace_back(id);
    }
    CHECK(served_a == expected);

    const ServedItem done = store.next_item(a.session_id);
    CHECK(done.done);
    CHECK(done.phase == Phase::done);
    CHECK(done.report_url == "/sessions/" + a.session_id + "/report");

    const auto none = store.create_session("none");
    CHECK(none.n_teach == 0);
    CHECK(store.next_item(none.session_id).phase == Phase::test);
    CHECK(store.session_count() == 3);
}

TEST_CASE("feedback reveals labels only while teaching") {
    SessionStore store(config_with_group());
    const auto s = store.create_session("strict");
    for (int i = 0; i < 20; ++i) {
        const ServedItem item = store.next_item(s.session_id);
        const Label truth = truth_of(store.config().problem, item.item_id);
        const Feedback fb = store.submit_answer(s.session_id, item.item_id, flip(truth));
        CHECK(fb.phase == item.phase);
        if (item.phase == Phase::teach) {
            REQUIRE(fb.correct_label.has_value());
            CHECK(*fb.correct_label == truth);
        } else {
            CHECK_FALSE(fb.correct_label.has_value());
        }
    }
}

TEST_CASE("out-of-order answers are rejected without changing state") {
    SessionStore store(config_with_group());
    const auto s = store.create_session("strict");
    CHECK(error_kind([&] { (void)store.submit_answer(s.session_id, "t06", Label::positive); }) ==
          ServiceError::Kind::conflict);
    CHECK(store.next_item(s.session_id).position == 0);
    (void)store.submit_answer(s.session_id, "t05", Label::negative);
    CHECK(error_kind([&] { (void)store.submit_answer(s.session_id, "t05", Label::negative); }) ==
          ServiceError::Kind::conflict);
    CHECK(store.next_item(s.session_id).item_id == "t06");
    CHECK(store.next_item(s.session_id).position == 1);

    CHECK(error_kind([&] { (void)store.create_session("missing"); }) == ServiceError::Kind::not_found);
    CHECK(error_kind([&] { (void)store.next_item("deadbeef"); }) == ServiceError::Kind::not_found);
    CHECK(error_kind([&] { (void)store.session_report(s.session_id); }) == ServiceError::Kind::not_done);

    run_session(store, s.session_id, 0);
    CHECK(error_kind([&] { (void)store.submit_answer(s.session_id, "s00", Label::positive); }) ==
          ServiceError::Kind::conflict);
}

TEST_CASE("report scores the test block only") {
    SessionStore store(config_with_group());
    const auto s = store.create_session("strict");
    // Wrong on every teaching item (feedback corrects them) and on 3 of 10 tests.
    for (int i = 0; i < 10; ++i) {
        const ServedItem item = store.next_item(s.session_id);
        (void)store.submit_answer(s.session_id, item.item_id, flip(truth_of(store.config().problem, item.item_id)));
    }
    run_session(store, s.session_id, 3);
    const SessionReport r = store.session_report(s.session_id);
    CHECK(r.test_error == doctest::Approx(0.3));
    CHECK(r.group == "strict");
    REQUIRE(r.per_item.size() == 20);
    CHECK_FALSE(r.per_item[0].correct);
    CHECK(r.per_item[0].phase == Phase::teach);
    CHECK_FALSE(r.per_item[10].correct);
    CHECK(r.per_item[13].correct);
    CHECK(r.per_item[13].given == r.per_item[13].truth);

    const auto perfect = store.create_session("strict");
    run_session(store, perfect.session_id, 0);
    CHECK(store.session_report(perfect.session_id).test_error == 0.0);
    const auto awful = store.create_session("none");
    run_session(store, awful.session_id, 10);
    CHECK(store.session_report(awful.session_id).test_error == 1.0);
}

TEST_CASE("features are served when enabled") {
    ServiceConfig c = config_with_group();
    c.serve_features = true;
    SessionStore store(c);
    const auto s = store.create_session("strict");
    const ServedItem item = store.next_item(s.session_id);
    REQUIRE(item.features.has_value());
    CHECK(*item.features == std::vector<double>{-2.75 + 0.5 * 5});
}

TEST_CASE("the answer log is replayed on restart") {
    TempDir dir;
    ServiceConfig c = config_with_group();
    c.log_path = dir.file("answers.jsonl");
    std::string finished;
    std::string partial;
    {
        SessionStore store(c);
        finished = store.create_session("strict").session_id;
        run_session(store, finished, 4);
        partial = store.create_session("none").session_id;
        (void)store.submit_answer(partial, "s00", Label::negative);
        (void)store.submit_answer(partial, "s01", Label::positive);
    }
    std::ifstream in(*c.log_path);
    std::string first_line;
    std::getline(in, first_line);
    const json created = json::parse(first_line);
    CHECK(created["event"] == "create");
    CHECK(created["group"] == "strict");

    SessionStore restored(c);
    CHECK(restored.session_count() == 2);
    CHECK(restored.session_report(finished).test_error == doctest::Approx(0.4));
    CHECK(restored.next_item(partial).item_id == "s02");
    (void)restored.submit_answer(partial, "s02", Label::positive);

    SessionStore again(c);
    CHECK(again.next_item(partial).item_id == "s03");

    std::ofstream(*c.log_path, std::ios::app) << "{\"event\":\"answer\",\"session\":\"zzz\"}\n";
    CHECK_THROWS(SessionStore{c});
}

TEST_CASE("concurrent sessions stay independent") {
    SessionStore store(config_with_group());
    constexpr int kThreads = 8;
    std::vector<std::string> ids(kThreads);
    std::vector<std::vector<std::string>> served(kThreads);
    std::vector<std::thread> pool;
    for (int t = 0; t < kThreads; ++t) {
        pool.emplace_back([&, t] {
            ids[t] = store.create_session(t % 2 ? "strict" : "none").session_id;
            served[t] = run_session(store, ids[t], static_cast<std::size_t>(t));
        });
    }
    for (auto& th : pool) th.join();
    CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == kThreads);
    for (int t = 0; t < kThreads; ++t) {
        CHECK(served[t] == served[t % 2]);
        CHECK(store.session_report(ids[t]).test_error == doctest::Approx(t / 10.0));
    }

    // Many threads racing on one session: each item is accepted exactly once.
    const auto shared = store.create_session("strict").session_id;
    std::atomic<int> accepted{0};
    std::vector<std::thread> racers;
    for (int t = 0; t < kThreads; ++t) {
        racers.emplace_back([&] {
            for (int k = 0; k < 200; ++k) {
                try {
                    const ServedItem item = store.next_item(shared);
                    if (item.done) return;
                    (void)store.submit_answer(shared, item.item_id, Label::positive);
                    ++accepted;
                } catch (const ServiceError&) {
                }
            }
        });
    }
    for (auto& th : racers) th.join();
    CHECK(accepted == 20);
    CHECK(store.session_report(shared).per_item.size() == 20);
}

// ─── HTTP ─────────────────────────────────────────────────────

namespace {

struct RunningServer {
    SessionStore store;
    HttpService http;
    int port = -1;
    std::thread worker;

    RunningServer(ServiceConfig c, std::optional<std::string> assets)
        : store(std::move(c)), http(store, std::move(assets)) {
        port = http.bind_any_port("127.0.0.1");
        REQUIRE(port > 0);
        worker = std::thread([this] { http.listen_after_bind(); });
        http.wait_until_ready();
    }
    ~RunningServer() {
        http.stop();
        worker.join();
    }
    [[nodiscard]] httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

}  // namespace

TEST_CASE("HTTP session walk-through") {
    TempDir dir;
    fs::create_directories(dir.path / "img");
    std::ofstream(dir.file("index.html")) << "<html>ok</html>";
    std::ofstream(dir.file("img/t05.png")) << "PNG";

    RunningServer server(config_with_group(), dir.path.string());
    auto cli = server.client();

    auto cfg = cli.Get("/config");
    REQUIRE(cfg);
    CHECK(cfg->status == 200);
    CHECK(cfg->get_header_value("Access-Control-Allow-Origin") == "*");
    const json config = json::parse(cfg->body);
    CHECK(config["groups"]["strict"] == 10);
    CHECK(config["groups"]["none"] == 0);
    CHECK(config["n_test"] == 10);
    CHECK(config["positive_name"] == "Positive");

    auto index = cli.Get("/index.html");
    REQUIRE(index);
    CHECK(index->status == 200);
    CHECK(index->body == "<html>ok</html>");
    auto asset = cli.Get("/img/t05.png");
    REQUIRE(asset);
    CHECK(asset->body == "PNG");

    auto preflight = cli.Options("/sessions");
    REQUIRE(preflight);
    CHECK(preflight->status == 204);
    CHECK(preflight->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

    auto bad = cli.Post("/sessions", "{\"group\": 3}", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    auto garbage = cli.Post("/sessions", "not json", "application/json");
    REQUIRE(garbage);
    CHECK(garbage->status == 400);
    auto unknown = cli.Post("/sessions", "{\"group\": \"other\"}", "application/json");
    REQUIRE(unknown);
    CHECK(unknown->status == 404);
    CHECK(json::parse(unknown->body).contains("error"));

    auto created = cli.Post("/sessions", "{\"group\": \"strict\"}", "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    const json session = json::parse(created->body);
    const std::string sid = session["session_id"];
    CHECK(session["n_teach"] == 10);
    CHECK(session["n_test"] == 10);
    const std::string base = "/sessions/" + sid;

    auto early = cli.Get(base + "/report");
    REQUIRE(early);
    CHECK(early->status == 409);

    auto missing = cli.Get("/sessions/abc123/next");
    REQUIRE(missing);
    CHECK(missing->status == 404);

    int tests_wrong = 0;
    for (int i = 0; i < 20; ++i) {
        auto next = cli.Get(base + "/next");
        REQUIRE(next);
        REQUIRE(next->status == 200);
        const json item = json::parse(next->body);
        CHECK(item["done"] == false);
        CHECK(item["index"] == i);
        CHECK(item["total"] == 20);
        CHECK_FALSE(item.contains("label"));
        CHECK_FALSE(item.contains("y"));
        const std::string id = item["item_id"];
        const Label truth = truth_of(server.store.config().problem, id);
        Label answer = truth;
        if (item["phase"] == "test" && tests_wrong < 7) {
            answer = flip(truth);
            ++tests_wrong;
        }

        json body;
        body["item_id"] = id;
        body["label"] = to_int(answer);
        if (i == 0) {
            json wrong = body;
            wrong["item_id"] = "t06";
            auto conflict = cli.Post(base + "/answer", wrong.dump(), "application/json");
            REQUIRE(conflict);
            CHECK(conflict->status == 409);
            json zero = body;
            zero["label"] = 0;
            auto invalid = cli.Post(base + "/answer", zero.dump(), "application/json");
            REQUIRE(invalid);
            CHECK(invalid->status == 400);
        }
        auto answered = cli.Post(base + "/answer", body.dump(), "application/json");
        REQUIRE(answered);
        REQUIRE(answered->status == 200);
        const json fb = json::parse(answered->body);
        CHECK(fb["phase"] == item["phase"]);
        if (item["phase"] == "teach") {
            CHECK(fb["feedback"] == to_int(truth));
        } else {
            CHECK(fb["feedback"].is_null());
        }
    }

    auto done = cli.Get(base + "/next");
    REQUIRE(done);
    const json finished = json::parse(done->body);
    CHECK(finished["done"] == true);
    CHECK(finished["report_url"] == base + "/report");

    auto report = cli.Get(base + "/report");
    REQUIRE(report);
    CHECK(report->status == 200);
    const json r = json::parse(report->body);
    CHECK(r["test_error"].get<double>() == doctest::Approx(0.7));
    CHECK(r["per_item"].size() == 20);
    CHECK(r["per_item"][0]["item_id"] == "t05");
    CHECK(r["per_item"][10]["correct"] == false);
    CHECK(r["per_item"][19]["correct"] == true);
    CHECK(r["group"] == "strict");
}

TEST_CASE("HTTP service rejects a missing assets directory") {
    SessionStore store(config_with_group());
    CHECK_THROWS_AS(HttpService(store, std::string("/definitely/not/here")), IoError);
}
