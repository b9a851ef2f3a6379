"""Link-level simulator for two-user MISO downlink multiple access.

Implements RSMA with SDMA and NOMA as special cases: LoS channel synthesis
with limited CSI feedback, WMMSE sum-rate precoding, a polar-coded OFDM
physical layer with SIC receivers, and a measurement harness that empirically
solves the MCS-limited sum-throughput problem.
"""

__version__ = "0.1.0"
