#include "crowdteach/service.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "crowdteach/error.hpp"

namespace crowdteach {

namespace {

using json = nlohmann::ordered_json;

constexpr std::string_view kNoTeachingGroup = "none";

std::int64_t now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string random_token() {
    std::random_device rd;
    std::ostringstream ss;
    ss << std::hex;
    for (int i = 0; i < 4; ++i) {
        const std::uint32_t word = rd();
        for (int shift = 28; shift >= 0; shift -= 4) ss << ((word >> shift) & 0xFu);
    }
    return ss.str();
}

Phase phase_from_string(std::string_view s) {
    if (s == "teach") return Phase::teach;
    if (s == "test") return Phase::test;
    if (s == "done") return Phase::done;
    throw ParseError("unknown phase '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(Phase phase) noexcept {
    switch (phase) {
        case Phase::teach: return "teach";
        case Phase::test: return "test";
        case Phase::done: return "done";
    }
    return "done";
}

int ServiceError::status() const noexcept {
    switch (kind_) {
        case Kind::bad_request: return 400;
        case Kind::not_found: return 404;
        case Kind::conflict: return 409;
        case Kind::not_done: return 409;
    }
    return 500;
}

// ─── SessionStore ─────────────────────────────────────────────

struct SessionStore::Session {
    std::string id;
    std::string group;
    const std::vector<std::string>* teach_ids = nullptr;
    std::size_t cursor = 0;
    std::vector<Answer> answers;
    mutable std::mutex mutex;

    [[nodiscard]] std::size_t n_teach() const { return teach_ids->size(); }
};

SessionStore::SessionStore(ServiceConfig config) : config_(std::move(config)) {
    validate(config_.problem);
    for (const auto& e : config_.problem.teaching_set) {
        teach_items_.emplace(e.id, Item{e.id, e.label, e.asset, e.features});
    }
    config_.groups.try_emplace(std::string(kNoTeachingGroup));
    for (const auto& [name, ids] : config_.groups) {
        std::set<std::string_view> seen;
        for (const auto& id : ids) {
            if (!teach_items_.contains(id)) {
                throw ValidationError("group '" + name + "': unknown teaching example '" + id + "'");
            }
            if (!seen.insert(id).second) {
                throw ValidationError("group '" + name + "': example '" + id + "' repeats");
            }
        }
    }
    const std::size_t available = config_.problem.test_set ? config_.problem.test_set->size() : 0;
    if (config_.test_len > available) {
        throw ValidationError("test length " + std::to_string(config_.test_len) +
                              " exceeds the problem's " + std::to_string(available) +
                              " test examples");
    }
    for (std::size_t i = 0; i < config_.test_len; ++i) {
        const auto& e = (*config_.problem.test_set)[i];
        test_items_.push_back(Item{e.id, e.label, e.asset, e.features});
    }
    if (config_.log_path) replay_log();
}

SessionStore::~SessionStore() = default;

std::vector<std::string> SessionStore::group_names() const {
    std::vector<std::string> out;
    for (const auto& [name, ids] : config_.groups) out.push_back(name);
    return out;
}

const std::vector<std::string>& SessionStore::group_sequence(std::string_view group) const {
    const auto it = config_.groups.find(std::string(group));
    if (it == config_.groups.end()) {
        throw ServiceError(ServiceError::Kind::not_found, "unknown group '" + std::string(group) + "'");
    }
    return it->second;
}

std::size_t SessionStore::session_count() const {
    std::shared_lock lock(sessions_mutex_);
    return sessions_.size();
}

std::shared_ptr<SessionStore::Session> SessionStore::find(std::string_view id) const {
    std::shared_lock lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) {
        throw ServiceError(ServiceError::Kind::not_found, "unknown session '" + std::string(id) + "'");
    }
    return it->second;
}

CreatedSession SessionStore::create_session(std::string_view group) {
    return create_with_id(group, random_token(), true);
}

CreatedSession SessionStore::create_with_id(std::string_view group, std::string id, bool log) {
    const auto& ids = group_sequence(group);
    auto s = std::make_shared<Session>();
    s->id = id;
    s->group = std::string(group);
    s->teach_ids = &ids;
    {
        std::unique_lock lock(sessions_mutex_);
        if (!sessions_.emplace(id, s).second) {
            throw ServiceError(ServiceError::Kind::conflict, "session '" + id + "' already exists");
        }
    }
    if (log) {
        json line;
        line["event"] = "create";
        line["session"] = id;
        line["group"] = s->group;
        line["ts"] = now_ms();
        append_log(line.dump());
    }
    return CreatedSession{id, ids.size(), test_items_.size()};
}

ServedItem SessionStore::next_item(std::string_view session_id) const {
    const auto s = find(session_id);
    std::lock_guard lock(s->mutex);
    ServedItem out;
    out.total = s->n_teach() + test_items_.size();
    out.position = s->cursor;
    if (s->cursor >= out.total) {
        out.done = true;
        out.phase = Phase::done;
        out.report_url = "/sessions/" + s->id + "/report";
        return out;
    }
    const Item* item = nullptr;
    if (s->cursor < s->n_teach()) {
        out.phase = Phase::teach;
        item = &teach_items_.find((*s->teach_ids)[s->cursor])->second;
    } else {
        out.phase = Phase::test;
        item = &test_items_[s->cursor - s->n_teach()];
    }
    out.item_id = item->id;
    out.asset = item->asset;
    if (config_.serve_features) out.features = item->features;
    return out;
}

Feedback SessionStore::submit_answer(std::string_view session_id, std::string_view item_id,
                                     Label label) {
    const auto s = find(session_id);
    std::lock_guard lock(s->mutex);
    return answer_locked(*s, item_id, label, true, now_ms());
}

Feedback SessionStore::answer_locked(Session& s, std::string_view item_id, Label label, bool log,
                                     std::int64_t ts) {
    const std::size_t total = s.n_teach() + test_items_.size();
    if (s.cursor >= total) {
        throw ServiceError(ServiceError::Kind::conflict, "session is already complete");
    }
    const bool teaching = s.cursor < s.n_teach();
    const Item& current = teaching ? teach_items_.find((*s.teach_ids)[s.cursor])->second
                                   : test_items_[s.cursor - s.n_teach()];
    if (current.id != item_id) {
        for (const auto& a : s.answers) {
            if (a.item_id == item_id) {
                throw ServiceError(ServiceError::Kind::conflict,
                                   "item '" + std::string(item_id) + "' was already answered");
            }
        }
        throw ServiceError(ServiceError::Kind::conflict, "item '" + std::string(item_id) +
                                                             "' is not the current item ('" +
                                                             current.id + "')");
    }
    Answer a{current.id, label, label == current.label, teaching ? Phase::teach : Phase::test, ts};
    if (log) {
        json line;
        line["event"] = "answer";
        line["session"] = s.id;
        line["item_id"] = a.item_id;
        line["label"] = to_int(label);
        line["correct"] = a.correct;
        line["phase"] = to_string(a.phase);
        line["ts"] = ts;
        append_log(line.dump());
    }
    s.answers.push_back(std::move(a));
    ++s.cursor;
    Feedback fb;
    fb.phase = teaching ? Phase::teach : Phase::test;
    if (teaching) fb.correct_label = current.label;
    return fb;
}

SessionReport SessionStore::session_report(std::string_view session_id) const {
    const auto s = find(session_id);
    std::lock_guard lock(s->mutex);
    if (s->cursor < s->n_teach() + test_items_.size()) {
        throw ServiceError(ServiceError::Kind::not_done, "session is not complete");
    }
    SessionReport r;
    r.session_id = s->id;
    r.group = s->group;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < s->answers.size(); ++i) {
        const Answer& a = s->answers[i];
        const Label truth = i < s->n_teach() ? teach_items_.find(a.item_id)->second.label
                                             : test_items_[i - s->n_teach()].label;
        r.per_item.push_back(ReportItem{a.item_id, a.phase, a.given, truth, a.correct});
        if (a.phase == Phase::test && !a.correct) ++wrong;
    }
    r.test_error = test_items_.empty()
                       ? 0.0
                       : static_cast<double>(wrong) / static_cast<double>(test_items_.size());
    return r;
}

void SessionStore::append_log(const std::string& line) {
    if (!config_.log_path) return;
    std::lock_guard lock(log_mutex_);
    std::ofstream out(*config_.log_path, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot open log '" + *config_.log_path + "' for appending");
    out << line << '\n';
    out.flush();
    if (!out) throw IoError("failed writing log '" + *config_.log_path + "'");
}

void SessionStore::replay_log() {
    const std::string& path = *config_.log_path;
    if (!std::filesystem::exists(path)) return;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open log '" + path + "' for reading");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path + ": line " + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
            const std::string event = j.at("event").get<std::string>();
            const std::string session = j.at("session").get<std::string>();
            if (event == "create") {
                create_with_id(j.at("group").get<std::string>(), session, false);
            } else if (event == "answer") {
                const auto s = find(session);
                std::lock_guard lock(s->mutex);
                const int label = j.at("label").get<int>();
                if (label != 1 && label != -1) throw ParseError("label must be -1 or 1");
                answer_locked(*s, j.at("item_id").get<std::string>(), label_from_int(label), false,
                              j.at("ts").get<std::int64_t>());
                if (auto it = j.find("phase"); it != j.end()) {
                    if (phase_from_string(it->get<std::string>()) != s->answers.back().phase) {
                        throw ParseError("phase does not match the session state");
                    }
                }
            } else {
                throw ParseError("unknown event '" + event + "'");
            }
        } catch (const json::exception& e) {
            throw ParseError(where + ": " + e.what());
        } catch (const ServiceError& e) {
            throw ValidationError(where + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
}

// ─── HTTP front end ───────────────────────────────────────────

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    json body;
    body["error"] = message;
    send_json(res, status, body);
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const ServiceError& e) {
        send_error(res, e.status(), e.what());
    } catch (const json::exception& e) {
        send_error(res, 400, std::string("malformed request: ") + e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, e.what());
    }
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ServiceError(ServiceError::Kind::bad_request, "request body must be a JSON object");
    }
    return j;
}

}  // namespace

HttpService::HttpService(SessionStore& store, std::optional<std::string> assets_dir)
    : store_(store), server_(std::make_unique<httplib::Server>()) {
    server_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                  {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                  {"Access-Control-Allow-Headers", "Content-Type"}});
    if (assets_dir) {
        if (!server_->set_mount_point("/", *assets_dir)) {
            throw IoError("assets directory '" + *assets_dir + "' does not exist");
        }
    }
    install_routes();
}

HttpService::~HttpService() = default;

void HttpService::install_routes() {
    auto& srv = *server_;

    srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    srv.Get("/config", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] {
            json body;
            json groups = json::object();
            for (const auto& name : store_.group_names()) {
                groups[name] = store_.group_sequence(name).size();
            }
            body["groups"] = std::move(groups);
            body["n_test"] = store_.config().test_len;
            body["positive_name"] = store_.config().positive_name;
            body["negative_name"] = store_.config().negative_name;
            send_json(res, 200, body);
        });
    });

    srv.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = parse_body(req);
            const auto it = body.find("group");
            if (it == body.end() || !it->is_string()) {
                throw ServiceError(ServiceError::Kind::bad_request, "'group' must be a string");
            }
            const CreatedSession c = store_.create_session(it->get<std::string>());
            json out;
            out["session_id"] = c.session_id;
            out["n_teach"] = c.n_teach;
            out["n_test"] = c.n_test;
            send_json(res, 201, out);
        });
    });

    srv.Get(R"(/sessions/([0-9A-Za-z]+)/next)",
            [this](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                    const ServedItem item = store_.next_item(req.matches[1].str());
                    json out;
                    if (item.done) {
                        out["done"] = true;
                        out["report_url"] = item.report_url;
                    } else {
                        out["done"] = false;
                        out["item_id"] = item.item_id;
                        out["asset"] = item.asset ? json(*item.asset) : json(nullptr);
                        if (item.features) out["features"] = *item.features;
                        out["phase"] = to_string(item.phase);
                        out["index"] = item.position;
                        out["total"] = item.total;
                    }
                    send_json(res, 200, out);
                });
            });

    srv.Post(R"(/sessions/([0-9A-Za-z]+)/answer)",
             [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] {
                     const json body = parse_body(req);
                     const auto id = body.find("item_id");
                     const auto label = body.find("label");
                     if (id == body.end() || !id->is_string()) {
                         throw ServiceError(ServiceError::Kind::bad_request,
                                            "'item_id' must be a string");
                     }
                     if (label == body.end() || !label->is_number_integer() ||
                         (label->get<long long>() != 1 && label->get<long long>() != -1)) {
                         throw ServiceError(ServiceError::Kind::bad_request,
                                            "'label' must be -1 or 1");
                     }
                     const Feedback fb =
                         store_.submit_answer(req.matches[1].str(), id->get<std::string>(),
                                              label_from_int(label->get<int>()));
                     json out;
                     out["phase"] = to_string(fb.phase);
                     out["feedback"] = fb.correct_label ? json(to_int(*fb.correct_label))
                                                        : json(nullptr);
                     send_json(res, 200, out);
                 });
             });

    srv.Get(R"(/sessions/([0-9A-Za-z]+)/report)",
            [this](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                    const SessionReport r = store_.session_report(req.matches[1].str());
                    json out;
                    out["session_id"] = r.session_id;
                    out["group"] = r.group;
                    out["test_error"] = r.test_error;
                    json items = json::array();
                    for (const auto& it : r.per_item) {
                        json o;
                        o["item_id"] = it.item_id;
                        o["phase"] = to_string(it.phase);
                        o["given_label"] = to_int(it.given);
                        o["correct_label"] = to_int(it.truth);
                        o["correct"] = it.correct;
                        items.push_back(std::move(o));
                    }
                    out["per_item"] = std::move(items);
                    send_json(res, 200, out);
                });
            });
}

bool HttpService::listen(const std::string& host, int port) { return server_->listen(host, port); }

int HttpService::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool HttpService::listen_after_bind() { return server_->listen_after_bind(); }

void HttpService::stop() { server_->stop(); }

void HttpService::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace crowdteach
