#pragma once

#include "bindbench/common.hpp"
#include "bindbench/prompting.hpp"
#include "bindbench/scene.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace bindbench {

std::string base64_encode(std::string_view data);

// ---------------------------------------------------------------------------
// Clock and transport seams. Tests drive these with virtual/scripted
// implementations; production uses the system clock and cpp-httplib.

struct Clock {
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() = 0;
    virtual void sleep_ms(std::int64_t ms) = 0;
};

std::shared_ptr<Clock> system_clock();

// Advances instantly on sleep; now() is the accumulated virtual time.
class VirtualClock : public Clock {
public:
    std::int64_t now_ms() override { return now_; }
    void sleep_ms(std::int64_t ms) override { now_ += ms; }
    void advance_ms(std::int64_t ms) { now_ += ms; }

private:
    std::int64_t now_ = 0;
};

struct HttpResult {
    bool transport_ok = false; // false: connection/read failed, no status
    bool timed_out = false;
    std::string error;
    int status = 0;
    std::string body;
};

struct Transport {
    virtual ~Transport() = default;
    virtual HttpResult post(const std::string& url,
                            const std::vector<std::pair<std::string, std::string>>& headers,
                            const std::string& json_body, int timeout_s) = 0;
};

std::shared_ptr<Transport> httplib_transport();

// ---------------------------------------------------------------------------

// Paces requests so that any 60 s window holds at most rpm of them
// (uniform spacing, no burst credit).
class RateLimiter {
public:
    RateLimiter(double requests_per_minute, std::shared_ptr<Clock> clock);
    void acquire();

private:
    double interval_ms_;
    std::shared_ptr<Clock> clock_;
    std::mutex mutex_;
    std::int64_t next_slot_ms_ = 0;
};

// ---------------------------------------------------------------------------

// Seeded error injection for the offline oracle. All-zero rates answer
// every task exactly from ground truth.
struct OracleErrorModel {
    double flip_rate = 0.0;                 // search
    std::map<int, double> count_noise;      // offset -> probability; rest is 0
    double color_swap_rate = 0.0;           // describe
    double shape_swap_rate = 0.0;
    double omission_rate = 0.0;
    double choice_error_rate = 0.0;         // spatial
    std::uint64_t seed = 0;

    void validate() const; // throws Error when a rate leaves [0,1]
};

nlohmann::json oracle_model_to_json(const OracleErrorModel& m);
OracleErrorModel oracle_model_from_json(const nlohmann::json& j);

// Answer text in the prompt grammar, derived from the instance ground truth.
// Deterministic per (model seed, instance id) regardless of call order.
std::string oracle_answer(const TaskInstance& inst, const OracleErrorModel& model);

// ---------------------------------------------------------------------------

enum class ProviderKind { openai_compatible, anthropic_compatible, oracle };

std::string provider_kind_name(ProviderKind k);
ProviderKind provider_kind_from_name(const std::string& name);

struct ProviderConfig {
    std::string name;     // handle used in run configs and records
    ProviderKind kind = ProviderKind::oracle;
    std::string base_url;
    std::string model_id = "oracle";
    std::string auth_env; // name of the env var holding the secret
    int max_retries = 3;
    double requests_per_minute = 60.0;
    int timeout_s = 60;
    double temperature = 0.0; // benchmark runs pin 0 for reproducibility
    int max_tokens = 1024;
    OracleErrorModel oracle;

    void validate() const;
};

nlohmann::json provider_config_to_json(const ProviderConfig& c);
ProviderConfig provider_config_from_json(const nlohmann::json& j);

struct ModelResponse {
    std::string raw_text; // byte-exact as returned
    std::int64_t latency_ms = 0;
    int attempts = 1;
    std::optional<int> prompt_tokens;
    std::optional<int> completion_tokens;
    std::string request_id;
    bool truncated = false;
};

struct SendError : Error {
    enum class Kind { transport, request, timeout };
    SendError(Kind k, int http_status, const std::string& msg)
        : Error(msg), kind(k), status(http_status) {}
    Kind kind;
    int status; // 0 when no HTTP status was received
};

// One HTTP provider endpoint: encodes the wire format, retries transient
// failures with exponential backoff, and respects the rate limit.
class ProviderClient {
public:
    explicit ProviderClient(ProviderConfig cfg, std::shared_ptr<Transport> transport = nullptr,
                            std::shared_ptr<Clock> clock = nullptr);

    ModelResponse send(const std::string& image_png, const PromptText& prompt);

    const ProviderConfig& config() const { return cfg_; }

private:
    ProviderConfig cfg_;
    std::shared_ptr<Transport> transport_;
    std::shared_ptr<Clock> clock_;
    RateLimiter limiter_;
    std::mutex rng_mutex_;
    Rng jitter_rng_;
};

} // namespace bindbench
