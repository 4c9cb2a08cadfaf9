#include "acsg/policy/policy.hpp"

#include "acsg/core/hash.hpp"

#include <httplib.h>

#include <chrono>
#include <thread>

namespace acsg {

namespace {

class RemotePolicy : public Policy {
public:
    explicit RemotePolicy(const PolicyOptions& opts) : cfg_(opts.remote), prompt_dir_(opts.prompt_dir) {
        if (cfg_.url.empty()) throw PolicyError(PolicyErrorCode::BadConfig, "remote policy needs ACSG_REMOTE_URL");
        // split "http://host:port/path" into client base and request path
        const auto scheme = cfg_.url.find("://");
        const auto slash = cfg_.url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
        base_ = slash == std::string::npos ? cfg_.url : cfg_.url.substr(0, slash);
        path_ = slash == std::string::npos ? "/" : cfg_.url.substr(slash);
    }

    PolicyKind kind() const override { return PolicyKind::Remote; }

    Decision propose(const ProposerQuery& q) override {
        return parse_proposer_answer(call("proposer", render_prompt(PromptRole::Proposer, q, prompt_dir_), to_json(q)));
    }

    VerifierAnswer verify(const VerifierQuery& q) override {
        return parse_verifier_answer(call("verifier", render_prompt(PromptRole::Verifier, q, prompt_dir_), to_json(q)), q);
    }

private:
    std::string call(const std::string& role, const std::string& prompt, const nlohmann::json& query) {
        const nlohmann::json body = {{"role", role}, {"prompt", prompt}, {"query_digest", fnv1a(query.dump())}};
        httplib::Client client(base_);
        const auto secs = static_cast<time_t>(cfg_.timeout_s);
        const auto usecs = static_cast<time_t>((cfg_.timeout_s - static_cast<double>(secs)) * 1e6);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);
        httplib::Headers headers;
        if (!cfg_.token.empty()) headers.emplace("Authorization", "Bearer " + cfg_.token);

        std::string last_error = "no attempt";
        for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
            if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100 * attempt));
            auto res = client.Post(path_, headers, body.dump(), "application/json");
            if (!res) {
                last_error = httplib::to_string(res.error());
                continue;
            }
            if (res->status != 200) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            nlohmann::json reply;
            try {
                reply = nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception&) {
                throw PolicyError(PolicyErrorCode::RemoteUnparseable, "remote reply is not JSON");
            }
            if (!reply.contains("text") || !reply["text"].is_string())
                throw PolicyError(PolicyErrorCode::RemoteUnparseable, "remote reply has no text field");
            return reply["text"].get<std::string>();
        }
        throw PolicyError(PolicyErrorCode::RemoteUnavailable,
                          "remote endpoint unavailable after " + std::to_string(cfg_.retries + 1) + " attempts: " + last_error);
    }

    RemoteConfig cfg_;
    std::string prompt_dir_;
    std::string base_;
    std::string path_;
};

}  // namespace

std::unique_ptr<Policy> make_remote_policy(const PolicyOptions& opts) { return std::make_unique<RemotePolicy>(opts); }

}  // namespace acsg
