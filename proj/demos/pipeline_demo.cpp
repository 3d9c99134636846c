// Minimal end-to-end tour of the library: extract scene-graph contexts,
// train two small embedding spaces, fuse them, evaluate against human
// judgements, estimate cross-space dependence, and cluster.
//
// Build target: pipeline_demo (no arguments).

#include <iostream>
#include <sstream>

#include "embkit/cluster.hpp"
#include "embkit/corpus.hpp"
#include "embkit/embedding.hpp"
#include "embkit/infogain.hpp"
#include "embkit/scenegraph.hpp"
#include "embkit/sgns.hpp"
#include "embkit/simeval.hpp"

using namespace embkit;

int main() {
    // -- structured contexts from a couple of scene graphs --
    const std::string vg = R"([
      {"image_id": "demo-1",
       "objects": [{"id": 1, "names": ["dog"], "attributes": ["brown"]},
                   {"id": 2, "names": ["ball"], "attributes": ["red"]},
                   {"id": 3, "names": ["grass"], "attributes": ["green"]}],
       "relationships": [{"subject_id": 1, "predicate": "chasing", "object_id": 2},
                         {"subject_id": 2, "predicate": "on", "object_id": 3}]},
      {"image_id": "demo-2",
       "objects": [{"id": 1, "names": ["cat"], "attributes": ["black"]},
                   {"id": 2, "names": ["ball"], "attributes": ["red"]},
                   {"id": 3, "names": ["dog"], "attributes": []}],
       "relationships": [{"subject_id": 1, "predicate": "watching", "object_id": 2},
                         {"subject_id": 3, "predicate": "near", "object_id": 1}]}
    ])";
    std::istringstream vg_in(vg);
    const auto graphs = sg::parse_scene_graphs(vg_in);
    const auto contexts = sg::extract_contexts(graphs, 3);
    std::cout << "scene-graph contexts: " << contexts.size() << " pairs\n";

    // -- window contexts from a tiny corpus --
    std::istringstream corpus_in(
        "the brown dog chases the red ball\n"
        "the black cat watches the red ball\n"
        "the dog runs on the green grass\n"
        "the cat and the dog play near the grass\n");
    const auto text = corpus::read_corpus(corpus_in);
    const auto windows = corpus::window_pairs(text, 3);

    // -- train both spaces with the same small configuration --
    sgns::Config cfg;
    cfg.dim = 16;
    cfg.epochs = 30;
    cfg.negatives = 4;
    cfg.seed = 7;
    const auto structured = emb::from_sgns(sgns::train(contexts, cfg), emb::Modality::structured);
    const auto linguistic = emb::from_sgns(sgns::train(windows, cfg), emb::Modality::linguistic);
    std::cout << "structured space: " << structured.size() << " words, dim "
              << structured.dim() << "\n";
    std::cout << "linguistic space: " << linguistic.size() << " words, dim "
              << linguistic.dim() << "\n";

    // -- fuse and evaluate --
    const auto fused = emb::fuse(linguistic, structured);
    eval::SimilarityDataset judgements;
    judgements.name = "demo";
    judgements.pairs = {{"dog", "cat", 8.0}, {"dog", "ball", 6.0},  {"cat", "ball", 5.5},
                        {"grass", "dog", 3.0}, {"grass", "ball", 4.0}, {"red", "ball", 7.0}};
    for (const auto* space : {&linguistic, &structured, &fused}) {
        const auto r = eval::evaluate(*space, judgements);
        std::cout << "eval " << emb::to_string(space->modality) << ": rho = " << r.spearman
                  << " (covered " << r.covered_pairs << "/" << r.total_pairs << ")\n";
    }

    // -- dependence between the two training routes --
    mi::CompareOptions opt;
    opt.method = "hsic";
    const auto rep = mi::compare_modalities(linguistic, structured, fused, opt);
    std::cout << "hsic(linguistic, structured) = " << rep.el_es.value << " over n = " << rep.n
              << " shared words\n";

    // -- cluster the structured space --
    const auto clustering = cluster::kmeans(structured, 3, 11);
    const auto scores = cluster::score(structured, clustering);
    std::cout << "kmeans k=3 on structured: dbi = " << scores.dbi << ", chi = " << scores.chi
              << ", silhouette = " << scores.silhouette << "\n";
    return 0;
}
