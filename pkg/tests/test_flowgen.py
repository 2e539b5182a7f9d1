import pytest

from flowmat.eve import FlowRecord, IngestCounters, parse_flow_record
from flowmat.flowgen import ConfigError, GenConfig, generate, packet_total


def test_empty_stream():
    assert list(generate(GenConfig(n_flows=0))) == []


def test_default_constant_packets():
    lines = list(generate(GenConfig(n_flows=2, seed=3)))
    assert len(lines) == 2
    for line in lines:
        rec = parse_flow_record(line)
        assert isinstance(rec, FlowRecord)
        assert rec.pkts_toserver == 100
        assert rec.pkts_toclient == 0


def test_deterministic_byte_stream():
    cfg = GenConfig(n_flows=500, seed=77)
    assert list(generate(cfg)) == list(generate(cfg))


def test_seed_changes_stream():
    a = list(generate(GenConfig(n_flows=50, seed=1)))
    b = list(generate(GenConfig(n_flows=50, seed=2)))
    assert a != b


def test_parse_closure_all_models():
    for cfg in (
        GenConfig(n_flows=300, seed=5),
        GenConfig(n_flows=300, seed=5, addr_model="zipf"),
        GenConfig(n_flows=300, seed=5, geometric_mean=20.0, split=0.7),
    ):
        counters = IngestCounters()
        for line in generate(cfg):
            counters.count(parse_flow_record(line))
        assert counters.records_ok == 300
        assert counters.lines_consumed == 300


def test_packet_total_oracle_constant():
    cfg = GenConfig(n_flows=13108, pkts_per_flow=100)
    assert packet_total(cfg) == 1_310_800


def test_packet_total_oracle_geometric():
    cfg = GenConfig(n_flows=40_000, seed=9, geometric_mean=30.0)
    total = 0
    for line in generate(cfg):
        rec = parse_flow_record(line)
        total += rec.pkts_toserver + rec.pkts_toclient
    assert total == packet_total(cfg)


def test_split_partitions_packets():
    for line in generate(GenConfig(n_flows=100, seed=4, split=0.25)):
        rec = parse_flow_record(line)
        assert rec.pkts_toserver + rec.pkts_toclient == 100
        assert rec.pkts_toserver == 25


@pytest.mark.parametrize(
    "cfg",
    [
        GenConfig(n_flows=-1),
        GenConfig(n_flows=1, pkts_per_flow=0),
        GenConfig(n_flows=1, geometric_mean=0.5),
        GenConfig(n_flows=1, addr_model="bogus"),
        GenConfig(n_flows=1, addr_model="zipf", zipf_exponent=1.0),
        GenConfig(n_flows=1, split=1.5),
    ],
)
def test_invalid_config_rejected(cfg):
    with pytest.raises(ConfigError):
        list(generate(cfg))
