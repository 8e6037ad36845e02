#include "forge/embed.hpp"

#include <cmath>

#include "forge/error.hpp"
#include "forge/rng.hpp"

namespace forge {

void MockEmbedClient::script(std::string text, std::vector<double> vector) {
    scripted_[std::move(text)] = std::move(vector);
}

void MockEmbedClient::set_fallback(std::function<std::vector<double>(const std::string&)> fn) {
    fallback_ = std::move(fn);
}

std::vector<std::vector<double>> MockEmbedClient::embed(const std::vector<std::string>& inputs) {
    std::vector<std::vector<double>> out;
    out.reserve(inputs.size());
    for (const auto& text : inputs) {
        auto it = scripted_.find(text);
        if (it != scripted_.end()) {
            out.push_back(it->second);
        } else if (fallback_) {
            out.push_back(fallback_(text));
        } else {
            raise(ErrorCode::EmbedServiceFailure,
                  "mock embedder has no entry for input (length " +
                      std::to_string(text.size()) + ")");
        }
    }
    return out;
}

HashEmbedClient::HashEmbedClient(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ < 2) {
        raise(ErrorCode::DomainError, "embedding dimension must be >= 2");
    }
}

std::vector<std::vector<double>> HashEmbedClient::embed(const std::vector<std::string>& inputs) {
    std::vector<std::vector<double>> out;
    out.reserve(inputs.size());
    for (const auto& text : inputs) {
        std::uint64_t hash = 0xcbf29ce484222325ULL;
        for (unsigned char c : text) {
            hash ^= c;
            hash *= 0x100000001b3ULL;
        }
        rng::SplitMix rng(hash);
        std::vector<double> vec(dimension_);
        double norm_sq = 0.0;
        for (auto& v : vec) {
            v = static_cast<double>(rng.next() >> 11) / 9007199254740992.0 * 2.0 - 1.0;
            norm_sq += v * v;
        }
        const double norm = std::sqrt(norm_sq);
        for (auto& v : vec) v /= norm;
        out.push_back(std::move(vec));
    }
    return out;
}

}  // namespace forge
