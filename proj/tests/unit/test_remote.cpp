#include "physcad/agent/remote_backend.hpp"

#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <thread>

using namespace physcad::agent;

namespace {

/// Local HTTP server on an ephemeral port, stopped on destruction.
class TestServer {
public:
    TestServer()
    {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~TestServer()
    {
        server_.stop();
        thread_.join();
    }
    httplib::Server& server() { return server_; }
    std::string url(const std::string& path = "") const
    {
        return "http://127.0.0.1:" + std::to_string(port_) + path;
    }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

ChatRequest sample_request()
{
    ChatRequest r;
    r.model_id = "m-1";
    r.temperature = 0.5;
    r.max_output_tokens = 100;
    r.agent = AgentRole::Planner;
    r.messages.push_back({"system", {MessagePart::from_text("be brief")}});
    r.messages.push_back({"user", {MessagePart::from_text("hello"), MessagePart::from_image({"image/png", {1, 2, 3}})}});
    return r;
}

RemoteConfig config_for(Provider p, const std::string& endpoint, const std::string& env = "")
{
    RemoteConfig c;
    c.provider = p;
    c.endpoint = endpoint;
    c.api_key_env = env;
    c.initial_backoff = std::chrono::milliseconds(1);
    c.timeout = std::chrono::seconds(5);
    return c;
}

} // namespace

TEST_SUITE("remote")
{
    TEST_CASE("request encodings")
    {
        auto g = encode_request(Provider::Generic, sample_request());
        CHECK(g["model"] == "m-1");
        CHECK(g["messages"][1]["parts"][1]["image"]["data"] == "AQID");
        CHECK(g["thinking"] == false);

        auto a = encode_request(Provider::Anthropic, sample_request());
        CHECK(a["system"] == "be brief");
        CHECK(a["messages"].size() == 1);
        CHECK(a["messages"][0]["content"][1]["source"]["media_type"] == "image/png");
        CHECK(a["max_tokens"] == 100);

        auto o = encode_request(Provider::OpenAI, sample_request());
        CHECK(o["messages"][0]["role"] == "system");
        CHECK(o["messages"][1]["content"][1]["image_url"]["url"] == "data:image/png;base64,AQID");
    }

    TEST_CASE("response decodings")
    {
        auto g = decode_response(Provider::Generic, {{"text", "hi"}, {"input_tokens", 3}, {"output_tokens", 4}});
        CHECK(g.text == "hi");
        CHECK(g.input_tokens == 3);
        auto a = decode_response(Provider::Anthropic,
                                 {{"content", {{{"type", "thinking"}, {"thinking", "hmm"}},
                                               {{"type", "text"}, {"text", "A"}},
                                               {{"type", "text"}, {"text", "B"}}}},
                                  {"usage", {{"input_tokens", 10}, {"output_tokens", 2}}}});
        CHECK(a.text == "AB");
        CHECK(a.output_tokens == 2);
        auto o = decode_response(Provider::OpenAI,
                                 {{"choices", {{{"message", {{"role", "assistant"}, {"content", "ok"}}}}}},
                                  {"usage", {{"prompt_tokens", 8}, {"completion_tokens", 1}}}});
        CHECK(o.text == "ok");
        CHECK(o.input_tokens == 8);
        CHECK_THROWS(decode_response(Provider::Generic, {{"nope", 1}}));
        CHECK_THROWS(decode_response(Provider::Generic, {{"text", "x"}, {"input_tokens", -1}}));
        CHECK(provider_from_string("openai") == Provider::OpenAI);
        CHECK_THROWS(provider_from_string("other"));
        CHECK_THROWS(RemoteBackend(config_for(Provider::Generic, "ftp://x")));
    }

    TEST_CASE("round trips against a local server for each provider")
    {
        TestServer s;
        std::string seen_auth, seen_key, seen_version;
        s.server().Post("/chat", [&](const httplib::Request& req, httplib::Response& res) {
            seen_auth = req.get_header_value("Authorization");
            auto body = nlohmann::json::parse(req.body);
            res.set_content(nlohmann::json{{"text", "generic:" + body["model"].get<std::string>()},
                                           {"input_tokens", 12},
                                           {"output_tokens", 5}}
                                .dump(),
                            "application/json");
        });
        s.server().Post("/v1/messages", [&](const httplib::Request& req, httplib::Response& res) {
            seen_key = req.get_header_value("x-api-key");
            seen_version = req.get_header_value("anthropic-version");
            res.set_content(R"({"content": [{"type": "text", "text": "anthropic"}],
                                "usage": {"input_tokens": 7, "output_tokens": 2}})",
                            "application/json");
        });
        s.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"choices": [{"message": {"content": "openai"}}],
                                "usage": {"prompt_tokens": 9, "completion_tokens": 4}})",
                            "application/json");
        });

        ::setenv("PHYSCAD_TEST_KEY", "secret-value", 1);
        RemoteBackend g(config_for(Provider::Generic, s.url(), "PHYSCAD_TEST_KEY"));
        auto rg = g.chat(sample_request());
        CHECK(rg.text == "generic:m-1");
        CHECK(rg.input_tokens == 12);
        CHECK(seen_auth == "Bearer secret-value");

        RemoteBackend a(config_for(Provider::Anthropic, s.url(), "PHYSCAD_TEST_KEY"));
        auto ra = a.chat(sample_request());
        CHECK(ra.text == "anthropic");
        CHECK(seen_key == "secret-value");
        CHECK(seen_version == "2023-06-01");

        RemoteBackend o(config_for(Provider::OpenAI, s.url()));
        auto ro = o.chat(sample_request());
        CHECK(ro.text == "openai");
        CHECK(ro.output_tokens == 4);
        CHECK(o.name() == "remote:openai");
        ::unsetenv("PHYSCAD_TEST_KEY");
    }

    TEST_CASE("retries on server errors and fails fast on client errors")
    {
        TestServer s;
        std::atomic<int> calls{0};
        s.server().Post("/flaky", [&](const httplib::Request&, httplib::Response& res) {
            if (++calls < 3) {
                res.status = calls == 1 ? 500 : 429;
                return;
            }
            res.set_content(R"({"text": "finally"})", "application/json");
        });
        std::atomic<int> bad_calls{0};
        s.server().Post("/bad", [&](const httplib::Request&, httplib::Response& res) {
            ++bad_calls;
            res.status = 400;
            res.set_content("bad request", "text/plain");
        });
        std::atomic<int> down_calls{0};
        s.server().Post("/down", [&](const httplib::Request&, httplib::Response& res) {
            ++down_calls;
            res.status = 503;
        });
        s.server().Post("/garbage", [&](const httplib::Request&, httplib::Response& res) {
            res.set_content("not json", "text/plain");
        });

        std::vector<std::chrono::milliseconds> sleeps;
        auto sleeper = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };

        RemoteBackend flaky(config_for(Provider::Generic, s.url("/flaky")));
        flaky.set_sleeper(sleeper);
        CHECK(flaky.chat(sample_request()).text == "finally");
        CHECK(calls == 3);
        CHECK(sleeps == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(1),
                                                               std::chrono::milliseconds(2)});

        RemoteBackend bad(config_for(Provider::Generic, s.url("/bad")));
        bad.set_sleeper(sleeper);
        CHECK_THROWS_AS(bad.chat(sample_request()), BackendUnavailable);
        CHECK(bad_calls == 1);

        RemoteBackend down(config_for(Provider::Generic, s.url("/down")));
        down.set_sleeper(sleeper);
        CHECK_THROWS_AS(down.chat(sample_request()), BackendUnavailable);
        CHECK(down_calls == 4); // one try plus three retries

        RemoteBackend garbage(config_for(Provider::Generic, s.url("/garbage")));
        CHECK_THROWS_AS(garbage.chat(sample_request()), BackendUnavailable);
    }

    TEST_CASE("missing credential or unreachable host")
    {
        ::unsetenv("PHYSCAD_TEST_MISSING_KEY");
        RemoteBackend b(config_for(Provider::Anthropic, "http://127.0.0.1:9", "PHYSCAD_TEST_MISSING_KEY"));
        CHECK_THROWS_AS(b.chat(sample_request()), BackendUnavailable);

        auto cfg = config_for(Provider::Generic, "http://127.0.0.1:9");
        cfg.max_retries = 1;
        RemoteBackend unreachable(cfg);
        int slept = 0;
        unreachable.set_sleeper([&](std::chrono::milliseconds) { ++slept; });
        CHECK_THROWS_AS(unreachable.chat(sample_request()), BackendUnavailable);
        CHECK(slept == 1);
    }
}
