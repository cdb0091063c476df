#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crowdteach/core.hpp"

namespace httplib {
class Server;
}

namespace crowdteach {

// ─── Session logic ────────────────────────────────────────────
//
// Teach-then-test protocol: the learner sees each item without its label,
// answers, and receives the correct label only during the teaching phase.
// Test answers are recorded silently; the score is available once the
// session is done.

enum class Phase { teach, test, done };
[[nodiscard]] std::string_view to_string(Phase phase) noexcept;

class ServiceError : public std::runtime_error {
public:
    enum class Kind { bad_request, not_found, conflict, not_done };
    ServiceError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    /// HTTP status for this error.
    [[nodiscard]] int status() const noexcept;

private:
    Kind kind_;
};

struct ServiceConfig {
    TeachingProblem problem;
    /// Group name → teaching sequence (teaching-set example ids). A group
    /// named "none" with no teaching is always present.
    std::map<std::string, std::vector<std::string>> groups;
    /// Number of test items, taken in order from the problem's test set.
    std::size_t test_len = 10;
    /// Include feature vectors in served items (for feature-card displays).
    bool serve_features = false;
    /// Append-only answer log (one JSON object per line); replayed on start.
    std::optional<std::string> log_path;
    std::string positive_name = "Positive";
    std::string negative_name = "Negative";
};

struct Answer {
    std::string item_id;
    Label given = Label::positive;
    bool correct = false;
    Phase phase = Phase::teach;
    std::int64_t timestamp_ms = 0;
};

struct CreatedSession {
    std::string session_id;
    std::size_t n_teach = 0;
    std::size_t n_test = 0;
};

struct ServedItem {
    bool done = false;
    std::string item_id;
    std::optional<std::string> asset;
    std::optional<std::vector<double>> features;
    Phase phase = Phase::teach;
    /// 0-based position in the combined teach + test list.
    std::size_t position = 0;
    std::size_t total = 0;
    std::string report_url;
};

struct Feedback {
    Phase phase = Phase::teach;
    /// Ground truth, only for teaching items.
    std::optional<Label> correct_label;
};

struct ReportItem {
    std::string item_id;
    Phase phase = Phase::teach;
    Label given = Label::positive;
    Label truth = Label::positive;
    bool correct = false;
};

struct SessionReport {
    std::string session_id;
    std::string group;
    double test_error = 0.0;
    std::vector<ReportItem> per_item;
};

class SessionStore {
public:
    /// Validates groups and test length against the problem (ValidationError)
    /// and replays the log if one exists.
    explicit SessionStore(ServiceConfig config);
    ~SessionStore();

    SessionStore(const SessionStore&) = delete;
    SessionStore& operator=(const SessionStore&) = delete;

    [[nodiscard]] CreatedSession create_session(std::string_view group);
    [[nodiscard]] ServedItem next_item(std::string_view session_id) const;
    Feedback submit_answer(std::string_view session_id, std::string_view item_id, Label label);
    [[nodiscard]] SessionReport session_report(std::string_view session_id) const;

    [[nodiscard]] std::vector<std::string> group_names() const;
    [[nodiscard]] const ServiceConfig& config() const noexcept { return config_; }
    /// Teaching-item ids a group's sessions receive.
    [[nodiscard]] const std::vector<std::string>& group_sequence(std::string_view group) const;
    [[nodiscard]] std::size_t session_count() const;

private:
    struct Item {
        std::string id;
        Label label = Label::positive;
        std::optional<std::string> asset;
        std::vector<double> features;
    };
    struct Session;

    [[nodiscard]] std::shared_ptr<Session> find(std::string_view id) const;
    CreatedSession create_with_id(std::string_view group, std::string id, bool log);
    Feedback answer_locked(Session& s, std::string_view item_id, Label label, bool log,
                           std::int64_t ts);
    void append_log(const std::string& line);
    void replay_log();

    ServiceConfig config_;
    std::map<std::string, Item, std::less<>> teach_items_;
    std::vector<Item> test_items_;

    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>, std::less<>> sessions_;

    std::mutex log_mutex_;
};

// ─── HTTP front end ───────────────────────────────────────────
//
//   POST /sessions              {"group": g}            → {session_id, n_teach, n_test}
//   GET  /sessions/{id}/next                            → item or {done, report_url}
//   POST /sessions/{id}/answer  {"item_id", "label"}    → {phase, feedback}
//   GET  /sessions/{id}/report                          → {test_error, per_item}
//   GET  /config                                        → groups and class names
//
// Responses carry permissive CORS headers. Static files are served from the
// assets directory when one is configured.

class HttpService {
public:
    HttpService(SessionStore& store, std::optional<std::string> assets_dir);
    ~HttpService();

    HttpService(const HttpService&) = delete;
    HttpService& operator=(const HttpService&) = delete;

    /// Binds and serves until stop(); returns false if binding failed.
    bool listen(const std::string& host, int port);
    /// Binds to an ephemeral port and returns it (or -1).
    int bind_any_port(const std::string& host);
    /// Serves on the socket bound by bind_any_port.
    bool listen_after_bind();
    void stop();
    void wait_until_ready() const;

private:
    void install_routes();

    SessionStore& store_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace crowdteach
