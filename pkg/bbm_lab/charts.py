import plotly.graph_objects as go
from plotly.subplots import make_subplots

PALETTE = ["#818cf8", "#22d3ee", "#f59e0b", "#ef4444", "#34d399", "#c084fc"]
NORM_SERIES = [
    ("norm_data_hs", "||h||_Hs"),
    ("norm_I2_hs", "||I2||_Hs"),
    ("norm_u_hs", "||u||_Hs"),
    ("norm_residual_hs", "residual"),
]


def _layout(fig, title, height=460):
    fig.update_layout(title=dict(text=title, font=dict(size=18, color="#09090b")),
                      font=dict(family="Inter,sans-serif", size=12, color="#52525b"),
                      paper_bgcolor="#ffffff", plot_bgcolor="#f4f4f5", height=height,
                      legend=dict(orientation="h", y=-0.18), margin=dict(l=60, r=30, t=60, b=60))
    return fig.to_html(include_plotlyjs=False, full_html=False)


def build_norm_chart(rows, title):
    """Norm columns against N on log-log axes, one trace per (column, s, eps); zero columns are skipped."""
    if not rows:
        return ""
    fig = go.Figure()
    groups = sorted({(r.s, r.eps) for r in rows})
    colour = 0
    for column, label in NORM_SERIES:
        for s, eps in groups:
            picked = sorted((r for r in rows if r.s == s and r.eps == eps), key=lambda r: r.N)
            values = [getattr(r, column) for r in picked]
            if not any(values) or any(v <= 0 for v in values):
                continue
            name = f"{label} (s={s:g}" + (f", eps={eps:g})" if eps else ")")
            fig.add_trace(go.Scatter(x=[r.N for r in picked], y=values, mode="lines+markers", name=name,
                                     line=dict(color=PALETTE[colour % len(PALETTE)], width=2)))
            colour += 1
    if not fig.data:
        return ""
    fig.update_xaxes(type="log", title="N")
    fig.update_yaxes(type="log", title="norm")
    return _layout(fig, title)


def build_theta_chart(diagnostics):
    axis = diagnostics.get("axis")
    theta = diagnostics.get("theta")
    if not axis or not theta:
        return ""
    fig = go.Figure(go.Heatmap(x=axis, y=axis, z=[list(col) for col in zip(*theta)],
                               colorscale="RdBu", zmid=0.0,
                               colorbar=dict(title=dict(text="theta"))))
    fig.update_xaxes(title="xi")
    fig.update_yaxes(title="xi1")
    return _layout(fig, "Resonance function", height=560)


def build_solver_chart(diagnostics):
    errors = diagnostics.get("order_errors")
    steps = diagnostics.get("order_dts")
    if not errors or not steps:
        return ""
    fig = make_subplots(rows=1, cols=2, subplot_titles=("RK4 error vs dt", "Drifts"))
    fig.add_trace(go.Scatter(x=steps, y=errors, mode="lines+markers", name="L2 error",
                             marker_color=PALETTE[0]), row=1, col=1)
    drifts = {k: diagnostics.get(k, 0.0) for k in ("mean_drift", "h1_drift", "residual", "return_error")}
    fig.add_trace(go.Bar(x=list(drifts), y=[max(v, 1e-18) for v in drifts.values()], name="drift",
                         marker_color=PALETTE[1]), row=1, col=2)
    fig.update_xaxes(type="log", row=1, col=1)
    fig.update_yaxes(type="log")
    return _layout(fig, "Solver validation")
