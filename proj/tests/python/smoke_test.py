"""End-to-end smoke test for the python bindings."""

import graphgeo as gg


def approx(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def main():
    # geodesic sanity: the documented NYS extents
    ns = gg.haversine_km(gg.Coord(40.54, -75.0), gg.Coord(44.75, -75.0))
    ew = gg.haversine_km(gg.Coord(40.54, -72.78), gg.Coord(40.54, -79.30))
    assert abs(ns - 467.98) / 467.98 < 0.02, ns
    assert abs(ew - 550.63) / 550.63 < 0.02, ew

    # synthetic measurements: deterministic, parse/serialize round trip
    cfg = gg.SynthConfig()
    cfg.n_landmarks = 40
    cfg.n_routers = 10
    cfg.repetitions = 3
    cfg.anonymity_prob = 0.1
    cfg.rule_violation_fraction = 0.2
    cfg.seed = 11
    out = gg.synth_network(cfg)
    assert len(out.landmarks) == 40
    assert len(out.traceroutes) == 120
    text = gg.serialize_traceroutes(out.traceroutes)
    again = gg.parse_traceroutes(text)
    assert gg.serialize_traceroutes(again) == text
    assert gg.serialize_traceroutes(gg.synth_network(cfg).traceroutes) == text

    # graph construction
    completed = gg.complete_paths(gg.extract_paths(out.traceroutes))
    graph = gg.build_graph(completed, out.landmarks, [], out.traceroutes,
                           out.truth.probe_ip, bin_seed=1)
    assert graph.n_nodes >= 40
    assert len(graph.node_features) == graph.n_nodes
    assert len(graph.node_features[0]) == 15
    assert len(graph.edge_features[0]) == 11
    for row in graph.node_features:
        assert sum(1 for v in row[5:] if v == 1.0) == 1

    # split / train / predict
    spec = gg.SplitSpec()
    spec.seed = 3
    split = gg.split_landmarks(out.landmarks, spec)
    assert len(split.train) == 28 and len(split.val) == 8 and len(split.test) == 4
    train = gg.labels_for(graph, out.landmarks, split.train)
    val = gg.labels_for(graph, out.landmarks, split.val)

    tcfg = gg.TrainConfig()
    tcfg.model.embed_dim = 16
    tcfg.model.edge_dim = 4
    tcfg.model.num_layers = 2
    tcfg.model.seed = 7
    tcfg.max_epochs = 30
    tcfg.patience = 30
    report = gg.train_model(graph, train, val, tcfg)
    assert len(report.history) == 30
    assert report.best_epoch >= 1
    assert report.scaler is not None

    preds = gg.predict(graph, report, tcfg.model, split.test)
    assert len(preds) == len(split.test)
    truth = out.truth.locations
    errors = [gg.haversine_km(p, truth[ip]) for p, ip in zip(preds, split.test)]
    stats = gg.error_stats_km(errors)
    assert stats.n == len(split.test)
    assert stats.max_km >= stats.median_km >= 0.0
    series = gg.cdf(errors)
    assert series[-1][1] == 1.0

    # baselines on the same split
    index = gg.PathIndex.from_graph(graph, completed)
    refs = [lm for lm in out.landmarks if lm.ip in set(split.train) | set(split.val)]
    slg = gg.slg_geolocate(split.test[0], refs, index)
    assert any(approx(slg.lat, lm.lat) and approx(slg.lon, lm.lon) for lm in refs)
    corr = gg.corr_slg_geolocate(split.test, refs, index, 0.5, -0.5)
    assert len(corr) == len(split.test)
    mcfg = gg.MlpGeoConfig()
    mcfg.hidden = 16
    mcfg.max_epochs = 50
    mcfg.patience = 50
    mlp = gg.mlp_geo_train(index, refs[:20], refs[20:], mcfg)
    mlp_preds = gg.mlp_geo_predict(mlp.model, index, split.test)
    assert len(mlp_preds) == len(split.test)

    # parameter count formula is exposed
    assert gg.param_count(tcfg.model, graph.n_nodes) > 0

    # validation errors surface as python exceptions
    try:
        gg.parse_landmarks("ip,lat,lon\n10.0.0.1,95.0,0.0\n")
    except ValueError:
        pass
    else:
        raise AssertionError("latitude out of range should raise")

    print("smoke test passed")


if __name__ == "__main__":
    main()
