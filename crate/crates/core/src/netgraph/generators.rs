//! Built-in topologies.

use super::{EdgeMode, Network, NetworkBuilder, TopologyError};
use crate::units::parse_rate;

fn numbered(mode: EdgeMode, n: usize) -> NetworkBuilder {
    let mut b = NetworkBuilder::new(mode);
    for i in 1..=n {
        b.add_node(&i.to_string(), 0).expect("fresh names");
    }
    b
}

/// Full-duplex complete graph on nodes `1..=n`.
pub fn clique(n: usize, capacity: f64) -> Network {
    assert!(n >= 2);
    let mut b = numbered(EdgeMode::FullDuplex, n);
    for u in 1..=n {
        for v in u + 1..=n {
            b.add_edge(&u.to_string(), &v.to_string(), capacity, 0)
                .expect("valid clique edge");
        }
    }
    b.build().expect("nonempty")
}

/// Ring `1 - 2 - ... - n - 1` with one shared capacity pool per link.
pub fn ring(n: usize, capacity: f64) -> Network {
    assert!(n >= 3);
    let mut b = numbered(EdgeMode::UndirectedShared, n);
    for u in 1..=n {
        let v = u % n + 1;
        b.add_edge(&u.to_string(), &v.to_string(), capacity, 0)
            .expect("valid ring edge");
    }
    b.build().expect("nonempty")
}

/// Star-like graph where hop-shortest routing between nodes 1 and 2 sees
/// only the direct link while `v - 2` link-disjoint paths exist.
///
/// Node 1 is the hub: it links to every other node. Nodes `3..v` (exclusive)
/// also link to node 2, giving `v - 3` two-hop detours next to the direct
/// link. Node `v` is a plain leaf of the hub. Full-duplex links.
pub fn star_construction(v: usize, capacity: f64) -> Network {
    assert!(v >= 4);
    let mut b = numbered(EdgeMode::FullDuplex, v);
    for k in 2..=v {
        b.add_edge("1", &k.to_string(), capacity, 0)
            .expect("hub link");
    }
    for k in 3..v {
        b.add_edge(&k.to_string(), "2", capacity, 0)
            .expect("detour link");
    }
    b.build().expect("nonempty")
}

/// Approximate 11-node research backbone in the style of National
/// LambdaRail. The adjacency is a best-effort reading of a published map,
/// not an authoritative edge list.
pub fn lambda_rail(capacity: f64) -> Network {
    const NODES: [&str; 11] = [
        "SEA", "SVL", "LAX", "DEN", "ELP", "HOU", "KSC", "CHI", "ATL", "WDC", "NYC",
    ];
    const LINKS: [(&str, &str); 14] = [
        ("SEA", "SVL"),
        ("SEA", "DEN"),
        ("SVL", "LAX"),
        ("SVL", "DEN"),
        ("LAX", "ELP"),
        ("DEN", "KSC"),
        ("ELP", "HOU"),
        ("HOU", "KSC"),
        ("HOU", "ATL"),
        ("KSC", "CHI"),
        ("CHI", "NYC"),
        ("CHI", "ATL"),
        ("ATL", "WDC"),
        ("WDC", "NYC"),
    ];
    let mut b = NetworkBuilder::new(EdgeMode::FullDuplex);
    for n in NODES {
        b.add_node(n, 0).expect("fresh names");
    }
    for (u, v) in LINKS {
        b.add_edge(u, v, capacity, 0).expect("valid link");
    }
    b.build().expect("nonempty")
}

/// Builds a topology from a generator spec such as `clique:8`,
/// `ring:8@1Gbps`, `star:6` or `lambdarail`.
///
/// Default capacities: clique and lambdarail 20 Gb/s, ring and star 1 Gb/s.
pub fn from_generator(spec: &str) -> Result<Network, TopologyError> {
    let bad = || TopologyError::UnknownGenerator(spec.to_string());
    let (shape, capacity) = match spec.split_once('@') {
        Some((shape, cap)) => (shape, Some(parse_rate(cap).map_err(|_| bad())?)),
        None => (spec, None),
    };
    if let Some(c) = capacity {
        if !(c.is_finite() && c > 0.0) {
            return Err(bad());
        }
    }
    let (name, size) = match shape.split_once(':') {
        Some((name, n)) => (name, Some(n.parse::<usize>().map_err(|_| bad())?)),
        None => (shape, None),
    };
    match (name, size) {
        ("clique", Some(n)) if n >= 2 => Ok(clique(n, capacity.unwrap_or(20e9))),
        ("ring", Some(n)) if n >= 3 => Ok(ring(n, capacity.unwrap_or(1e9))),
        ("star", Some(n)) if n >= 4 => Ok(star_construction(n, capacity.unwrap_or(1e9))),
        ("lambdarail", None) => Ok(lambda_rail(capacity.unwrap_or(20e9))),
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::is_reachable;

    #[test]
    fn generator_specs() {
        assert_eq!(from_generator("clique:8").unwrap().arc_count(), 56);
        let r = from_generator("ring:5@2Gbps").unwrap();
        assert_eq!(r.edges().len(), 5);
        assert_eq!(r.edges()[0].capacity, 2e9);
        assert_eq!(from_generator("star:6").unwrap().edges().len(), 5 + 3);
        assert_eq!(from_generator("lambdarail").unwrap().node_count(), 11);
        for bad in [
            "clique",
            "clique:x",
            "ring:2",
            "torus:4",
            "clique:4@0Gbps",
            "clique:4@fast",
        ] {
            assert!(from_generator(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn lambda_rail_is_connected() {
        let net = lambda_rail(20e9);
        for s in net.nodes() {
            for d in net.nodes() {
                assert!(s == d || is_reachable(&net, s, d, None));
            }
        }
    }
}
