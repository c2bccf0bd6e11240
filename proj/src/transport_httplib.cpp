#include "bindbench/common.hpp"
#include "bindbench/providers.hpp"

#include <httplib.h>

namespace bindbench {

namespace {

// "http://host:1234/v1" -> {"http://host:1234", "/v1"}.
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error("url missing scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport : public Transport {
public:
    HttpResult post(const std::string& url,
                    const std::vector<std::pair<std::string, std::string>>& headers,
                    const std::string& json_body, int timeout_s) override {
        auto [origin, path] = split_url(url);
        if (path.empty()) path = "/";
        httplib::Client client(origin);
        client.set_connection_timeout(timeout_s);
        client.set_read_timeout(timeout_s);
        client.set_write_timeout(timeout_s);

        httplib::Headers hs;
        for (const auto& [key, value] : headers) hs.emplace(key, value);

        auto result = client.Post(path, hs, json_body, "application/json");
        HttpResult out;
        if (!result) {
            out.transport_ok = false;
            out.timed_out = result.error() == httplib::Error::ConnectionTimeout ||
                            result.error() == httplib::Error::Read;
            out.error = httplib::to_string(result.error());
            return out;
        }
        out.transport_ok = true;
        out.status = result->status;
        out.body = result->body;
        return out;
    }
};

} // namespace

std::shared_ptr<Transport> httplib_transport() { return std::make_shared<HttplibTransport>(); }

} // namespace bindbench
