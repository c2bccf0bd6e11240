#include "bindbench/providers.hpp"

#include "bindbench/common.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace bindbench {

std::string base64_encode(std::string_view data) {
    static const char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= data.size()) {
        std::uint32_t v = (std::uint8_t(data[i]) << 16) | (std::uint8_t(data[i + 1]) << 8) |
                          std::uint8_t(data[i + 2]);
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out.push_back(table[(v >> 6) & 63]);
        out.push_back(table[v & 63]);
        i += 3;
    }
    std::size_t rest = data.size() - i;
    if (rest == 1) {
        std::uint32_t v = std::uint8_t(data[i]) << 16;
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out.append("==");
    } else if (rest == 2) {
        std::uint32_t v = (std::uint8_t(data[i]) << 16) | (std::uint8_t(data[i + 1]) << 8);
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out.push_back(table[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

class SystemClock : public Clock {
public:
    std::int64_t now_ms() override {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now().time_since_epoch())
            .count();
    }
    void sleep_ms(std::int64_t ms) override {
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    }
};

} // namespace

std::shared_ptr<Clock> system_clock() { return std::make_shared<SystemClock>(); }

RateLimiter::RateLimiter(double requests_per_minute, std::shared_ptr<Clock> clock)
    : clock_(std::move(clock)) {
    if (requests_per_minute <= 0) throw Error("rate limiter: requests_per_minute must be > 0");
    interval_ms_ = 60000.0 / requests_per_minute;
}

void RateLimiter::acquire() {
    std::int64_t wait;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        std::int64_t now = clock_->now_ms();
        std::int64_t slot = std::max(now, next_slot_ms_);
        next_slot_ms_ = slot + static_cast<std::int64_t>(interval_ms_);
        wait = slot - now;
    }
    if (wait > 0) clock_->sleep_ms(wait);
}

// ---------------------------------------------------------------------------

void OracleErrorModel::validate() const {
    auto check = [](double r, const char* what) {
        if (r < 0.0 || r > 1.0) throw Error(std::string("oracle error model: ") + what + " outside [0, 1]");
    };
    check(flip_rate, "flip_rate");
    check(color_swap_rate, "color_swap_rate");
    check(shape_swap_rate, "shape_swap_rate");
    check(omission_rate, "omission_rate");
    check(choice_error_rate, "choice_error_rate");
    double total = 0;
    for (const auto& [offset, p] : count_noise) {
        check(p, "count_noise probability");
        total += p;
    }
    if (total > 1.0 + 1e-9) throw Error("oracle error model: count_noise probabilities exceed 1");
}

nlohmann::json oracle_model_to_json(const OracleErrorModel& m) {
    nlohmann::json noise = nlohmann::json::object();
    for (const auto& [offset, p] : m.count_noise) noise[std::to_string(offset)] = p;
    return {{"flip_rate", m.flip_rate},
            {"count_noise", noise},
            {"color_swap_rate", m.color_swap_rate},
            {"shape_swap_rate", m.shape_swap_rate},
            {"omission_rate", m.omission_rate},
            {"choice_error_rate", m.choice_error_rate},
            {"seed", m.seed}};
}

OracleErrorModel oracle_model_from_json(const nlohmann::json& j) {
    OracleErrorModel m;
    m.flip_rate = j.value("flip_rate", 0.0);
    m.color_swap_rate = j.value("color_swap_rate", 0.0);
    m.shape_swap_rate = j.value("shape_swap_rate", 0.0);
    m.omission_rate = j.value("omission_rate", 0.0);
    m.choice_error_rate = j.value("choice_error_rate", 0.0);
    m.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("count_noise"))
        for (const auto& [key, p] : j.at("count_noise").items())
            m.count_noise[std::stoi(key)] = p.get<double>();
    m.validate();
    return m;
}

std::string oracle_answer(const TaskInstance& inst, const OracleErrorModel& model) {
    model.validate();
    Rng rng(derive_seed(model.seed, inst.id));

    switch (inst.task) {
        case Task::search: {
            bool value = std::get<SearchTruth>(inst.truth).present;
            if (rng.next_bool(model.flip_rate)) value = !value;
            return value ? "[True]" : "[False]";
        }
        case Task::count: {
            int value = std::get<CountTruth>(inst.truth).count;
            double u = rng.next_double();
            double acc = 0;
            for (const auto& [offset, p] : model.count_noise) {
                acc += p;
                if (u < acc) {
                    value += offset;
                    break;
                }
            }
            value = std::max(0, value);
            return "[" + std::to_string(value) + "]";
        }
        case Task::describe: {
            const auto& truth = std::get<DescribeTruth>(inst.truth);
            std::ostringstream out;
            int line = 1;
            for (Feature f : truth.objects) {
                if (rng.next_bool(model.omission_rate)) continue;
                if (rng.next_bool(model.color_swap_rate)) {
                    Color c;
                    do {
                        c = static_cast<Color>(rng.next_below(kColorCount));
                    } while (c == f.color);
                    f.color = c;
                }
                if (rng.next_bool(model.shape_swap_rate)) {
                    Shape s;
                    do {
                        s = static_cast<Shape>(rng.next_below(kShapeCount));
                    } while (s == f.shape);
                    f.shape = s;
                }
                out << line++ << ". " << color_name(f.color) << " " << shape_word(f.shape) << "\n";
            }
            return out.str();
        }
        case Task::spatial: {
            int option = std::get<SpatialTruth>(inst.truth).correct_option;
            if (rng.next_bool(model.choice_error_rate)) {
                int wrong;
                do {
                    wrong = rng.next_int(0, 3);
                } while (wrong == option);
                option = wrong;
            }
            return std::string("[") + static_cast<char>('A' + option) + "]";
        }
    }
    return "";
}

// ---------------------------------------------------------------------------

namespace {

const char* kKindNames[] = {"openai_compatible", "anthropic_compatible", "oracle"};

} // namespace

std::string provider_kind_name(ProviderKind k) { return kKindNames[static_cast<int>(k)]; }

ProviderKind provider_kind_from_name(const std::string& name) {
    for (int i = 0; i < 3; ++i)
        if (name == kKindNames[i]) return static_cast<ProviderKind>(i);
    throw IoError("unknown provider kind: " + name);
}

void ProviderConfig::validate() const {
    if (name.empty()) throw Error("provider config: name is required");
    if (requests_per_minute <= 0) throw Error("provider config: requests_per_minute must be > 0");
    if (max_retries < 0) throw Error("provider config: max_retries must be >= 0");
    if (kind != ProviderKind::oracle && base_url.empty())
        throw Error("provider config: base_url is required for HTTP providers");
    oracle.validate();
}

nlohmann::json provider_config_to_json(const ProviderConfig& c) {
    nlohmann::json j = {{"name", c.name},
                        {"kind", provider_kind_name(c.kind)},
                        {"model_id", c.model_id},
                        {"max_retries", c.max_retries},
                        {"requests_per_minute", c.requests_per_minute},
                        {"timeout_s", c.timeout_s},
                        {"temperature", c.temperature},
                        {"max_tokens", c.max_tokens}};
    if (!c.base_url.empty()) j["base_url"] = c.base_url;
    if (!c.auth_env.empty()) j["auth_env"] = c.auth_env;
    if (c.kind == ProviderKind::oracle) j["oracle"] = oracle_model_to_json(c.oracle);
    return j;
}

ProviderConfig provider_config_from_json(const nlohmann::json& j) {
    ProviderConfig c;
    c.name = j.at("name").get<std::string>();
    c.kind = provider_kind_from_name(j.at("kind").get<std::string>());
    c.base_url = j.value("base_url", std::string{});
    c.model_id = j.value("model_id", c.kind == ProviderKind::oracle ? std::string{"oracle"}
                                                                    : std::string{});
    c.auth_env = j.value("auth_env", std::string{});
    c.max_retries = j.value("max_retries", 3);
    c.requests_per_minute = j.value("requests_per_minute", 60.0);
    c.timeout_s = j.value("timeout_s", 60);
    c.temperature = j.value("temperature", 0.0);
    c.max_tokens = j.value("max_tokens", 1024);
    if (j.contains("oracle")) c.oracle = oracle_model_from_json(j.at("oracle"));
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------

namespace {

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

std::string body_excerpt(const std::string& body) {
    std::string e = body.substr(0, 200);
    std::replace(e.begin(), e.end(), '\n', ' ');
    return e;
}

struct WireRequest {
    std::string url;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
};

WireRequest build_wire(const ProviderConfig& cfg, const std::string& image_png,
                       const PromptText& prompt) {
    const std::string b64 = base64_encode(image_png);
    WireRequest req;
    if (cfg.kind == ProviderKind::openai_compatible) {
        req.url = cfg.base_url + "/chat/completions";
        nlohmann::json body = {
            {"model", cfg.model_id},
            {"temperature", cfg.temperature},
            {"messages",
             {{{"role", "user"},
               {"content",
                {{{"type", "text"}, {"text", prompt.text}},
                 {{"type", "image_url"},
                  {"image_url", {{"url", "data:image/png;base64," + b64}}}}}}}}}};
        req.body = body.dump();
        if (!cfg.auth_env.empty()) {
            const char* key = std::getenv(cfg.auth_env.c_str());
            if (!key || !*key) throw Error("auth env var not set: " + cfg.auth_env);
            req.headers.emplace_back("Authorization", std::string("Bearer ") + key);
        }
    } else {
        req.url = cfg.base_url + "/v1/messages";
        nlohmann::json body = {
            {"model", cfg.model_id},
            {"temperature", cfg.temperature},
            {"max_tokens", cfg.max_tokens},
            {"messages",
             {{{"role", "user"},
               {"content",
                {{{"type", "image"},
                  {"source",
                   {{"type", "base64"}, {"media_type", "image/png"}, {"data", b64}}}},
                 {{"type", "text"}, {"text", prompt.text}}}}}}}};
        req.body = body.dump();
        const char* key = nullptr;
        if (!cfg.auth_env.empty()) {
            key = std::getenv(cfg.auth_env.c_str());
            if (!key || !*key) throw Error("auth env var not set: " + cfg.auth_env);
        }
        req.headers.emplace_back("x-api-key", key ? key : "");
        req.headers.emplace_back("anthropic-version", "2023-06-01");
    }
    return req;
}

ModelResponse parse_wire_response(const ProviderConfig& cfg, const std::string& body) {
    ModelResponse resp;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
        if (cfg.kind == ProviderKind::openai_compatible) {
            const auto& choice = j.at("choices").at(0);
            resp.raw_text = choice.at("message").at("content").get<std::string>();
            resp.truncated = choice.value("finish_reason", "") == "length";
            if (j.contains("usage")) {
                resp.prompt_tokens = j["usage"].value("prompt_tokens", 0);
                resp.completion_tokens = j["usage"].value("completion_tokens", 0);
            }
        } else {
            resp.raw_text = j.at("content").at(0).at("text").get<std::string>();
            resp.truncated = j.value("stop_reason", "") == "max_tokens";
            if (j.contains("usage")) {
                resp.prompt_tokens = j["usage"].value("input_tokens", 0);
                resp.completion_tokens = j["usage"].value("output_tokens", 0);
            }
        }
        resp.request_id = j.value("id", "");
    } catch (const nlohmann::json::exception& e) {
        throw SendError(SendError::Kind::request, 200,
                        std::string("malformed provider response: ") + e.what());
    }
    return resp;
}

} // namespace

ProviderClient::ProviderClient(ProviderConfig cfg, std::shared_ptr<Transport> transport,
                               std::shared_ptr<Clock> clock)
    : cfg_(std::move(cfg)),
      transport_(transport ? std::move(transport) : httplib_transport()),
      clock_(clock ? std::move(clock) : system_clock()),
      limiter_(cfg_.requests_per_minute, clock_),
      jitter_rng_(fnv1a64(cfg_.name)) {
    cfg_.validate();
    if (cfg_.kind == ProviderKind::oracle)
        throw Error("oracle providers answer locally; ProviderClient is for HTTP endpoints");
}

ModelResponse ProviderClient::send(const std::string& image_png, const PromptText& prompt) {
    WireRequest req = build_wire(cfg_, image_png, prompt);

    const std::int64_t start = clock_->now_ms();
    HttpResult last;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        limiter_.acquire();
        last = transport_->post(req.url, req.headers, req.body, cfg_.timeout_s);

        if (last.transport_ok && last.status == 200) {
            ModelResponse resp = parse_wire_response(cfg_, last.body);
            resp.latency_ms = clock_->now_ms() - start;
            resp.attempts = attempt + 1;
            return resp;
        }
        if (last.transport_ok && !retryable_status(last.status)) {
            throw SendError(SendError::Kind::request, last.status,
                            "provider returned HTTP " + std::to_string(last.status) + ": " +
                                body_excerpt(last.body));
        }
        if (attempt == cfg_.max_retries) break;

        // Exponential backoff: base 1 s, factor 2, up to 10% jitter.
        double jitter;
        {
            std::lock_guard<std::mutex> lock(rng_mutex_);
            jitter = jitter_rng_.next_double();
        }
        auto delay = static_cast<std::int64_t>(1000.0 * (1 << attempt) * (1.0 + 0.1 * jitter));
        clock_->sleep_ms(std::min<std::int64_t>(delay, 30000));
    }

    int attempts = cfg_.max_retries + 1;
    if (!last.transport_ok && last.timed_out)
        throw SendError(SendError::Kind::timeout, 0,
                        "request timed out after " + std::to_string(attempts) + " attempts");
    if (!last.transport_ok)
        throw SendError(SendError::Kind::transport, 0,
                        "transport failed after " + std::to_string(attempts) +
                            " attempts: " + last.error);
    throw SendError(SendError::Kind::transport, last.status,
                    "retries exhausted after " + std::to_string(attempts) + " attempts (last HTTP " +
                        std::to_string(last.status) + ")");
}

} // namespace bindbench
