from .report import AmplifierParamsOut, LyapunovReport, OracleReport, OverlapReport, RunReport, SlaterReport

__all__ = ["AmplifierParamsOut", "LyapunovReport", "OracleReport", "OverlapReport", "RunReport", "SlaterReport"]
