#![no_main]

use libfuzzer_sys::fuzz_target;
use stackq::topology::{unfold_planar, validate_topology, TopologyGraph};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(graph) = TopologyGraph::from_json(text) {
        let report = validate_topology(&graph);
        assert_eq!(report.nodes, graph.nodes.len());
        assert_eq!(unfold_planar(&graph).edges.len(), graph.edges.len());
        let again = TopologyGraph::from_json(&graph.to_json()).expect("serialized graph reloads");
        assert_eq!(again, graph);
    }
});
