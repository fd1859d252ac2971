#include "hopqa/remote.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cmath>

namespace hopqa {

using nlohmann::json;

json wire_request(const ExtractionInput& input, const ExtractorConfig& config) {
    json req;
    req["mode"] = input.mode == ExtractMode::InitQuestionOnly ? "init" : "visit";
    req["question"] = input.question;
    req["clues"] = input.clues;
    if (input.paragraph) {
        req["paragraph"] = *input.paragraph;
    } else {
        req["paragraph"] = nullptr;
    }
    req["H"] = config.H;
    req["K"] = config.K;
    req["maxL"] = config.maxL;
    return req;
}

namespace {

std::vector<Span> parse_spans(const json& arr, const char* field, int token_count) {
    if (!arr.is_array()) {
        throw RemoteError(RemoteError::Kind::Schema, std::string(field) + " must be an array");
    }
    std::vector<Span> spans;
    for (const auto& js : arr) {
        if (!js.is_object() || !js.contains("text") || !js["text"].is_string() ||
            !js.contains("start") || !js["start"].is_number_integer() || !js.contains("end") ||
            !js["end"].is_number_integer() || !js.contains("score") || !js["score"].is_number()) {
            throw RemoteError(RemoteError::Kind::Schema,
                              std::string(field) + " entries need text/start/end/score");
        }
        Span s;
        s.text = js["text"].get<std::string>();
        s.start = js["start"].get<int>();
        s.end = js["end"].get<int>();
        s.score = js["score"].get<double>();
        if (!std::isfinite(s.score)) {
            throw RemoteError(RemoteError::Kind::Schema, "non-finite span score");
        }
        if (s.start < 0 || s.end < s.start || s.end >= token_count) {
            throw RemoteError(RemoteError::Kind::Schema,
                              std::string(field) + " span outside the paragraph");
        }
        spans.push_back(std::move(s));
    }
    return spans;
}

}  // namespace

ExtractionResult parse_wire_response(const json& body, const ExtractionInput& input,
                                     const ExtractorConfig& config) {
    if (!body.is_object() || !body.contains("hop_spans") || !body.contains("ans_spans") ||
        !body.contains("sem")) {
        throw RemoteError(RemoteError::Kind::Schema,
                          "response needs hop_spans, ans_spans and sem");
    }
    const int token_count =
        input.paragraph ? index_paragraph(*input.paragraph).token_count() : 0;

    ExtractionResult result;
    result.hop_spans = parse_spans(body["hop_spans"], "hop_spans", token_count);
    result.ans_spans = parse_spans(body["ans_spans"], "ans_spans", token_count);
    if (!body["sem"].is_null()) {
        if (!body["sem"].is_array()) {
            throw RemoteError(RemoteError::Kind::Schema, "sem must be an array or null");
        }
        if (static_cast<int>(body["sem"].size()) != config.H) {
            throw RemoteError(RemoteError::Kind::Dimension,
                              "sem has dimension " + std::to_string(body["sem"].size()) +
                                  ", expected " + std::to_string(config.H));
        }
        Vector sem(config.H);
        for (int i = 0; i < config.H; ++i) {
            if (!body["sem"][static_cast<std::size_t>(i)].is_number()) {
                throw RemoteError(RemoteError::Kind::Schema, "sem entries must be numbers");
            }
            sem(i) = body["sem"][static_cast<std::size_t>(i)].get<double>();
            if (!std::isfinite(sem(i))) {
                throw RemoteError(RemoteError::Kind::Schema, "non-finite sem entry");
            }
        }
        result.sem = std::move(sem);
    }
    return result;
}

RemoteExtractor::RemoteExtractor(std::string endpoint, ExtractorConfig config,
                                 double timeout_seconds)
    : endpoint_(std::move(endpoint)), config_(config), timeout_seconds_(timeout_seconds) {}

ExtractionResult RemoteExtractor::extract(const ExtractionInput& input) const {
    // Split a path suffix off the endpoint, if any.
    std::string base = endpoint_;
    std::string prefix;
    const auto scheme = base.find("://");
    if (const auto slash = base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
        slash != std::string::npos) {
        prefix = base.substr(slash);
        base = base.substr(0, slash);
    }

    httplib::Client client(base);
    const auto sec = static_cast<time_t>(timeout_seconds_);
    const auto usec = static_cast<time_t>((timeout_seconds_ - static_cast<double>(sec)) * 1e6);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);

    const std::string payload = wire_request(input, config_).dump();
    httplib::Result res = client.Post(prefix + "/extract", payload, "application/json");
    if (!res) {
        const auto err = res.error();
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
            throw RemoteError(RemoteError::Kind::Timeout,
                              "timeout talking to " + endpoint_);
        }
        throw RemoteError(RemoteError::Kind::Network,
                          "cannot reach " + endpoint_ + ": " + httplib::to_string(err));
    }
    if (res->status != 200) {
        throw RemoteError(RemoteError::Kind::Network,
                          endpoint_ + " returned status " + std::to_string(res->status));
    }
    json body;
    try {
        body = json::parse(res->body);
    } catch (const json::exception& e) {
        throw RemoteError(RemoteError::Kind::Schema,
                          std::string("response is not valid JSON: ") + e.what());
    }
    return parse_wire_response(body, input, config_);
}

}  // namespace hopqa
