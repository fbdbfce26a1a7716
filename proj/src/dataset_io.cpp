#include "lggm/generators.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lggm {

void write_dataset(const std::filesystem::path& dir, const std::vector<AdjacencyMatrix>& graphs) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt");
  if (!manifest) throw Error("cannot write " + (dir / "manifest.txt").string());
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    char name[32];
    std::snprintf(name, sizeof name, "graph_%05zu.txt", g);
    std::ofstream out(dir / name);
    if (!out) throw Error("cannot write " + (dir / name).string());
    write_edge_list(out, graphs[g]);
    manifest << name << ' ' << graphs[g].nodes() << '\n';
  }
}

std::vector<AdjacencyMatrix> read_dataset(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw InvalidArgument("cannot open manifest " + manifest.string());
  const auto base = manifest.parent_path();
  std::vector<AdjacencyMatrix> graphs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string file;
    Index n = 0;
    if (!(row >> file >> n)) throw InvalidArgument("malformed manifest line: '" + line + "'");
    std::ifstream graph_in(base / file);
    if (!graph_in) throw InvalidArgument("cannot open graph file " + (base / file).string());
    AdjacencyMatrix a = read_edge_list(graph_in);
    if (a.nodes() != n)
      throw InvalidArgument("manifest node count disagrees with " + file);
    graphs.push_back(std::move(a));
  }
  return graphs;
}

}  // namespace lggm
