#include "mopo/fitness.hpp"

#include "mopo/bleu.hpp"
#include "mopo/errors.hpp"
#include "mopo/log.hpp"
#include "mopo/rng.hpp"
#include "mopo/text.hpp"

#include <cmath>
#include <iostream>

namespace mopo {

std::vector<InstantiatedPrompt> instantiate(const Prompt& prompt,
                                            const std::vector<std::string>& emotions) {
    if (!contains(prompt.text, kEmotionSlot))
        throw ContractViolation("instantiate: prompt has no <em> placeholder: " + prompt.text);
    std::vector<InstantiatedPrompt> result;
    result.reserve(emotions.size());
    for (const auto& emotion : emotions) {
        InstantiatedPrompt ip;
        ip.parent_prompt_id = prompt.id;
        ip.emotion = emotion;
        ip.text = replace_all(prompt.text, kEmotionSlot, emotion);
        result.push_back(std::move(ip));
    }
    return result;
}

std::vector<TextSample> echo_filter(const InstantiatedPrompt& source,
                                    const std::vector<std::string>& texts, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw ContractViolation("echo_filter: threshold outside [0,1]");
    std::vector<TextSample> samples;
    samples.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        TextSample s;
        s.prompt_id = source.parent_prompt_id;
        s.emotion = source.emotion;
        s.index = static_cast<int>(i);
        s.text = texts[i];
        s.echo_bleu = split_ws(texts[i]).empty() ? 1.0 : sentence_bleu(texts[i], source.text);
        s.filtered = s.echo_bleu > threshold;
        samples.push_back(std::move(s));
    }
    return samples;
}

std::int64_t evaluation_seed(std::uint64_t run_seed, const std::string& prompt_text,
                             const std::string& emotion) {
    const std::string key =
        to_hex16(run_seed) + "|eval|" + normalize_ws(prompt_text) + "|" + emotion;
    return static_cast<std::int64_t>(fnv1a64(key));
}

ObjectiveVector fitness_from_samples(const std::vector<TextSample>& samples,
                                     const std::vector<std::string>& emotions,
                                     const Backends& backends, const RunConfig& config) {
    if (config.objectives.empty()) throw ContractViolation("evaluate: no objectives configured");

    ObjectiveVector fitness;
    for (const auto& o : config.objectives) fitness.objective_ids.push_back(o.name);
    fitness.scores.assign(config.objectives.size(), 0.0);

    for (std::size_t j = 0; j < config.objectives.size(); ++j) {
        double emotion_sum = 0.0;
        for (const auto& emotion : emotions) {
            std::vector<std::string> survivors;
            for (const auto& s : samples)
                if (s.emotion == emotion && !s.filtered) survivors.push_back(s.text);
            if (survivors.empty()) continue; // contributes 0 to the mean
            const auto response =
                backends.scorers[j]->score(ScoreRequest{survivors, emotion});
            if (response.scores.size() != survivors.size())
                throw BackendError("", true, "scorer returned mismatched score count");
            double sum = 0.0;
            for (double s : response.scores) {
                if (!(s >= 0.0 && s <= 1.0) || std::isnan(s))
                    throw BackendError("", true, "scorer returned score outside [0,1]");
                sum += s;
            }
            emotion_sum += sum / static_cast<double>(survivors.size());
        }
        fitness.scores[j] = emotion_sum / static_cast<double>(emotions.size());
    }
    return fitness;
}

EvaluatedPrompt evaluate(const Prompt& prompt, const Backends& backends,
                         const RunConfig& config) {
    EvaluatedPrompt result;
    result.prompt = prompt;

    for (const auto& ip : instantiate(prompt, config.emotions)) {
        GenerateRequest request;
        request.prompt = ip.text;
        request.n = config.texts_per_prompt;
        request.seed = evaluation_seed(config.rng_seed, prompt.text, ip.emotion);
        std::vector<std::string> texts;
        try {
            texts = backends.generator->generate(request).texts;
        } catch (const BackendError& e) {
            if (log_on(LogLevel::Warn))
                std::cerr << "[mopo] generation failed for emotion '" << ip.emotion
                          << "': " << e.what() << "\n";
        }
        auto samples = echo_filter(ip, texts, config.bleu_threshold);
        result.samples.insert(result.samples.end(), samples.begin(), samples.end());
    }

    result.fitness = fitness_from_samples(result.samples, config.emotions, backends, config);
    return result;
}

} // namespace mopo
