//! Build the check-in proximity graph and cluster it with the Louvain
//! method, comparing against the planted city partition.
//!
//! ```bash
//! cargo run --example geo_communities
//! ```

use std::collections::BTreeMap;

use spotcast::geonet::{build_geo_graph, geonet_search, haversine, louvain, GeoNetConfig};
use spotcast::ingest::GeoPoint;
use spotcast::synth::{generate, pairwise_agreement, SynthConfig};

fn main() {
    let london = GeoPoint { lat: 51.5007, lon: -0.1246 };
    let paris = GeoPoint { lat: 48.8584, lon: 2.2945 };
    println!("London to Paris: {:.1} km", haversine(london, paris) / 1000.0);

    let fixture = generate(&SynthConfig::default());
    let graph = build_geo_graph(&fixture.tuples, 140.0, 1);
    println!(
        "proximity graph: {} nodes, total edge weight {:.0}",
        graph.node_count(),
        graph.total_weight()
    );

    let result = louvain(&graph, 7).expect("non-empty graph");
    println!("modularity after each pass: {:?}", result.pass_modularity);
    println!("final modularity: {:.4}", result.partition.modularity);

    let communities = geonet_search(&fixture.tuples, &GeoNetConfig::default());
    let mut predicted = BTreeMap::new();
    for (i, c) in communities.iter().enumerate() {
        println!("  {} -> {} users", c.label, c.members.len());
        for m in &c.members {
            predicted.insert(m.clone(), i);
        }
    }
    let agreement = pairwise_agreement(&fixture.geo_truth, &predicted);
    println!("pairwise agreement with planted cities: {:.3}", agreement);
}
