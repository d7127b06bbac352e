#include "ddmr/partition.hpp"

#include <map>
#include <sstream>

#include "ddmr/error.hpp"

namespace ddmr {

namespace {

// Global group ids are created lazily and keyed by their geometric identity.
struct GroupKey
{
  int kind;  // 0 horizontal edge, 1 vertical edge, 2 vertex
  int a;
  int b;
  auto operator<=>(const GroupKey&) const = default;
};

} // namespace

DomainPartition build_partition(const Mesh& mesh, int sx, int sy)
{
  const int n = mesh.n;
  if (sx < 1 || sy < 1 || n % sx != 0 || n % sy != 0) {
    std::ostringstream msg;
    msg << "partition " << sx << "x" << sy << " does not divide the " << n << "x" << n
        << " mesh (require Sx | n and Sy | n)";
    throw ConfigError(msg.str());
  }

  DomainPartition part;
  part.n = n;
  part.sx = sx;
  part.sy = sy;
  part.mx = n / sx;
  part.my = n / sy;
  const int mx = part.mx;
  const int my = part.my;

  std::map<GroupKey, int> group_ids;
  auto group_for = [&](GroupKey key, GroupKind kind, std::vector<int> nodes) -> int {
    if (nodes.empty())
      return -1;
    auto [it, inserted] = group_ids.try_emplace(key, static_cast<int>(part.groups.size()));
    if (inserted) {
      InterfaceGroup g;
      g.kind = kind;
      g.nodes = std::move(nodes);
      part.groups.push_back(std::move(g));
    }
    return it->second;
  };

  // Horizontal interface line y = line*my, segment between x cross points seg*mx and (seg+1)*mx.
  auto horizontal = [&](int line, int seg) {
    std::vector<int> nodes;
    for (int i = seg * mx + 1; i < (seg + 1) * mx; ++i)
      nodes.push_back(mesh.node_index(i, line * my));
    return group_for({0, line, seg}, GroupKind::edge, std::move(nodes));
  };
  auto vertical = [&](int line, int seg) {
    std::vector<int> nodes;
    for (int j = seg * my + 1; j < (seg + 1) * my; ++j)
      nodes.push_back(mesh.node_index(line * mx, j));
    return group_for({1, line, seg}, GroupKind::edge, std::move(nodes));
  };
  auto vertex = [&](int cx, int cy) {
    return group_for({2, cx, cy}, GroupKind::vertex, {mesh.node_index(cx * mx, cy * my)});
  };

  part.subdomains.resize(static_cast<std::size_t>(sx) * sy);
  for (int by = 0; by < sy; ++by) {
    for (int bx = 0; bx < sx; ++bx) {
      Subdomain& sub = part.subdomains[part.subdomain_index(bx, by)];
      sub.bx = bx;
      sub.by = by;

      sub.triangles.reserve(2 * static_cast<std::size_t>(mx) * my);
      for (int lj = 0; lj < my; ++lj)
        for (int li = 0; li < mx; ++li) {
          const int c = (by * my + lj) * n + (bx * mx + li);
          sub.triangles.push_back(2 * c);
          sub.triangles.push_back(2 * c + 1);
        }

      for (int lj = 1; lj < my; ++lj)
        for (int li = 1; li < mx; ++li)
          sub.interior_nodes.push_back(mesh.node_index(bx * mx + li, by * my + lj));

      std::vector<int> candidates;
      if (by > 0)
        candidates.push_back(horizontal(by, bx));      // south
      if (bx + 1 < sx)
        candidates.push_back(vertical(bx + 1, by));    // east
      if (by + 1 < sy)
        candidates.push_back(horizontal(by + 1, bx));  // north
      if (bx > 0)
        candidates.push_back(vertical(bx, by));        // west
      if (bx > 0 && by > 0)
        candidates.push_back(vertex(bx, by));          // south-west
      if (bx + 1 < sx && by > 0)
        candidates.push_back(vertex(bx + 1, by));      // south-east
      if (bx + 1 < sx && by + 1 < sy)
        candidates.push_back(vertex(bx + 1, by + 1));  // north-east
      if (bx > 0 && by + 1 < sy)
        candidates.push_back(vertex(bx, by + 1));      // north-west
      for (int g : candidates)
        if (g >= 0)
          sub.groups.push_back(g);
    }
  }

  int offset = 0;
  for (auto& g : part.groups) {
    g.offset = offset;
    offset += g.size();
  }
  part.interface_size = offset;

  for (auto& sub : part.subdomains) {
    for (int g : sub.groups) {
      const auto& grp = part.groups[g];
      for (int k = 0; k < grp.size(); ++k) {
        sub.interface_nodes.push_back(grp.nodes[k]);
        sub.interface_map.push_back(grp.offset + k);
      }
    }

    sub.block_slot.assign(static_cast<std::size_t>(mx + 1) * (my + 1), -1);
    auto block_index = [&](int node) {
      const int i = node % (n + 1) - sub.bx * mx;
      const int j = node / (n + 1) - sub.by * my;
      return j * (mx + 1) + i;
    };
    for (int k = 0; k < sub.num_interior(); ++k)
      sub.block_slot[block_index(sub.interior_nodes[k])] = k;
    for (int k = 0; k < sub.num_interface(); ++k)
      sub.block_slot[block_index(sub.interface_nodes[k])] = -(k + 2);
  }
  return part;
}

Eigen::VectorXd DomainPartition::scatter(int s, const Eigen::VectorXd& local) const
{
  Eigen::VectorXd global = Eigen::VectorXd::Zero(interface_size);
  scatter_add(s, local, global);
  return global;
}

void DomainPartition::scatter_add(int s, const Eigen::VectorXd& local, Eigen::VectorXd& global) const
{
  const auto& map = subdomains.at(s).interface_map;
  if (local.size() != static_cast<Eigen::Index>(map.size()))
    throw ConfigError("scatter: local interface vector has the wrong length");
  if (global.size() != interface_size)
    throw ConfigError("scatter: condensed vector has the wrong length");
  for (std::size_t k = 0; k < map.size(); ++k)
    global[map[k]] += local[static_cast<Eigen::Index>(k)];
}

Eigen::VectorXd DomainPartition::gather(int s, const Eigen::VectorXd& global) const
{
  const auto& map = subdomains.at(s).interface_map;
  if (global.size() != interface_size)
    throw ConfigError("gather: condensed vector has the wrong length");
  Eigen::VectorXd local(map.size());
  for (std::size_t k = 0; k < map.size(); ++k)
    local[static_cast<Eigen::Index>(k)] = global[map[k]];
  return local;
}

LocalAssembler::LocalAssembler(const Mesh& mesh, const DomainPartition& partition, const PdeForm& form)
  : mesh_(mesh), partition_(partition), form_(form), dirichlet_(dirichlet_data(mesh, form.kind))
{
  if (partition.n != mesh.n)
    throw ConfigError("partition was built for a different mesh");
}

LocalSystem LocalAssembler::assemble(int s, std::span<const double> eta_local) const
{
  const Subdomain& sub = partition_.subdomains.at(s);
  if (eta_local.size() != sub.triangles.size())
    throw ConfigError("local field length does not match the subdomain triangle count");

  const int n0 = sub.num_interior();
  const int nb = sub.num_interface();
  const int side = mesh_.n + 1;
  const int mx = partition_.mx;

  std::vector<Eigen::Triplet<double>> t00, t0b, tb0, tbb;
  t00.reserve(7 * static_cast<std::size_t>(n0));
  t0b.reserve(4 * static_cast<std::size_t>(nb));
  tb0.reserve(4 * static_cast<std::size_t>(nb));
  tbb.reserve(5 * static_cast<std::size_t>(nb));
  Eigen::VectorXd f0 = Eigen::VectorXd::Zero(n0);
  Eigen::VectorXd fb = Eigen::VectorXd::Zero(nb);

  for (std::size_t lt = 0; lt < sub.triangles.size(); ++lt) {
    const int t = sub.triangles[lt];
    const ElementSystem e = form_.element(element_geometry(mesh_, t), eta_local[lt]);
    const auto& tri = mesh_.triangles[t];

    std::array<int, 3> slot;
    for (int a = 0; a < 3; ++a) {
      const int i = tri[a] % side - sub.bx * mx;
      const int j = tri[a] / side - sub.by * partition_.my;
      slot[a] = sub.block_slot[j * (mx + 1) + i];
    }

    for (int a = 0; a < 3; ++a) {
      const int ra = slot[a];
      if (ra == -1)
        continue;
      double rhs = e.f[a];
      for (int b = 0; b < 3; ++b) {
        const int cb = slot[b];
        const double v = e.K(a, b);
        if (cb == -1) {
          rhs -= v * dirichlet_.values[tri[b]];
        } else if (ra >= 0) {
          if (cb >= 0)
            t00.emplace_back(ra, cb, v);
          else
            t0b.emplace_back(ra, -(cb + 2), v);
        } else {
          if (cb >= 0)
            tb0.emplace_back(-(ra + 2), cb, v);
          else
            tbb.emplace_back(-(ra + 2), -(cb + 2), v);
        }
      }
      if (ra >= 0)
        f0[ra] += rhs;
      else
        fb[-(ra + 2)] += rhs;
    }
  }

  LocalSystem sys;
  sys.a00.resize(n0, n0);
  sys.a00.setFromTriplets(t00.begin(), t00.end());
  sys.a0b.resize(n0, nb);
  sys.a0b.setFromTriplets(t0b.begin(), t0b.end());
  sys.ab0.resize(nb, n0);
  sys.ab0.setFromTriplets(tb0.begin(), tb0.end());
  sys.abb.resize(nb, nb);
  sys.abb.setFromTriplets(tbb.begin(), tbb.end());
  sys.f0 = std::move(f0);
  sys.fb = std::move(fb);
  return sys;
}

LocalSystem LocalAssembler::assemble(int s, const CellField& eta) const
{
  const Subdomain& sub = partition_.subdomains.at(s);
  if (eta.values.size() != mesh_.num_triangles())
    throw ConfigError("field length does not match the mesh triangle count");
  std::vector<double> local(sub.triangles.size());
  for (std::size_t lt = 0; lt < local.size(); ++lt)
    local[lt] = eta.values[sub.triangles[lt]];
  return assemble(s, local);
}

LocalSystem assemble_local(const Mesh& mesh, const DomainPartition& partition, const PdeForm& form,
                           const CellField& eta, int s)
{
  return LocalAssembler(mesh, partition, form).assemble(s, eta);
}

} // namespace ddmr
