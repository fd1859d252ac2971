#pragma once
// HTTP client for an external System 1. POSTs the wire-protocol request to
// {endpoint}/extract and validates the response against the extraction
// contract (finite values, sem dimension H, spans inside the paragraph).

#include "hopqa/extractor.hpp"

#include <nlohmann/json_fwd.hpp>

#include <stdexcept>
#include <string>

namespace hopqa {

class RemoteError : public std::runtime_error {
public:
    enum class Kind { Network, Timeout, Schema, Dimension };

    RemoteError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Request JSON: {"mode":"init"|"visit","question":str,"clues":[str],
//                "paragraph":[str]|null,"H":int,"K":int,"maxL":int}
nlohmann::json wire_request(const ExtractionInput& input, const ExtractorConfig& config);

// Response JSON: {"hop_spans":[{"text","start","end","score"}],
//                 "ans_spans":[...], "sem":[float]|null}
ExtractionResult parse_wire_response(const nlohmann::json& body, const ExtractionInput& input,
                                     const ExtractorConfig& config);

class RemoteExtractor : public Extractor {
public:
    RemoteExtractor(std::string endpoint, ExtractorConfig config, double timeout_seconds = 30.0);

    ExtractionResult extract(const ExtractionInput& input) const override;

    const std::string& endpoint() const { return endpoint_; }

private:
    std::string endpoint_;
    ExtractorConfig config_;
    double timeout_seconds_;
};

}  // namespace hopqa
