"""Front-end round-trips and the three repair-loop diagnostic classes.

Round-trip property: parse -> print -> parse must reproduce a structurally
identical AST for every module in the synthesizable-subset corpus below.
"""

import time

import pytest

from trojangym.verilog import (interface_diagnostics, parse_for_top,
                               parse_source, port_signature, print_ast,
                               syntax_check)

SRAM_64x8 = """module sram_64x8 (
    input wire clk,
    input wire we,
    input wire [5:0] addr,
    input wire [7:0] wdata,
    output reg [7:0] rdata
);
    reg [7:0] mem [0:63];
    always @(posedge clk) begin
        if (we) begin
            mem[addr] <= wdata;
        end
        rdata <= mem[addr];
    end
endmodule
"""

UART_TX = """module uart_tx (
    input wire clk,
    input wire rst,
    input wire start,
    input wire [7:0] data,
    output reg tx,
    output reg busy
);
    reg [3:0] state;
    reg [7:0] shifter;
    reg [11:0] baud;
    always @(posedge clk) begin
        if (rst) begin
            state <= 4'd0;
            tx <= 1'b1;
            busy <= 1'b0;
        end else begin
            case (state)
                4'd0: begin
                    if (start) begin
                        shifter <= data;
                        state <= 4'd1;
                        busy <= 1'b1;
                        tx <= 1'b0;
                    end
                end
                4'd9: begin
                    tx <= 1'b1;
                    state <= 4'd0;
                    busy <= 1'b0;
                end
                default: begin
                    if (baud == 12'd0) begin
                        tx <= shifter[0];
                        shifter <= shifter >> 1;
                        state <= state + 4'd1;
                    end
                    baud <= baud + 12'd1;
                end
            endcase
        end
    end
endmodule
"""

UART_RX = """module uart_rx (
    input wire clk,
    input wire rst,
    input wire rx,
    output reg [7:0] data,
    output reg valid
);
    reg [3:0] count;
    reg [7:0] shifter;
    always @(posedge clk) begin
        if (rst) begin
            count <= 4'd0;
            valid <= 1'b0;
        end else if (count == 4'd8) begin
            data <= shifter;
            valid <= 1'b1;
            count <= 4'd0;
        end else begin
            shifter <= {rx, shifter[7:1]};
            count <= count + 4'd1;
            valid <= 1'b0;
        end
    end
endmodule
"""

AES_ADDKEY = """module aes_addkey (
    input wire [127:0] state_in,
    input wire [127:0] round_key,
    output wire [127:0] state_out
);
    assign state_out = state_in ^ round_key;
endmodule
"""

ROUND_TRIP_MODULES = [
    SRAM_64x8,
    UART_TX,
    UART_RX,
    AES_ADDKEY,
    # combinational kernels
    """module mux4 (
    input wire [1:0] sel,
    input wire [7:0] a,
    input wire [7:0] b,
    input wire [7:0] c,
    input wire [7:0] d,
    output reg [7:0] y
);
    always @(*) begin
        case (sel)
            2'b00: y = a;
            2'b01: y = b;
            2'b10: y = c;
            default: y = d;
        endcase
    end
endmodule
""",
    """module parity8 (
    input wire [7:0] d,
    output wire even,
    output wire odd
);
    assign odd = ^d;
    assign even = ~^d;
endmodule
""",
    """module absdiff (
    input wire [7:0] a,
    input wire [7:0] b,
    output wire [7:0] y
);
    assign y = (a > b) ? (a - b) : (b - a);
endmodule
""",
    """module swizzle (
    input wire [15:0] d,
    output wire [15:0] y
);
    assign y = {d[7:0], d[15:8]};
endmodule
""",
    """module repl_fill (
    input wire bit_in,
    input wire [3:0] nib,
    output wire [15:0] y
);
    assign y = {{12{bit_in}}, nib};
endmodule
""",
    """module reductions (
    input wire [7:0] d,
    output wire all_ones,
    output wire any_one,
    output wire xor_all
);
    assign all_ones = &d;
    assign any_one = |d;
    assign xor_all = ^d;
endmodule
""",
    """module shifts (
    input wire [15:0] d,
    input wire [3:0] n,
    output wire [15:0] left,
    output wire [15:0] right
);
    assign left = d << n;
    assign right = d >> n;
endmodule
""",
    """module compare_unit (
    input wire [7:0] a,
    input wire [7:0] b,
    output wire lt,
    output wire eq,
    output wire ge
);
    assign lt = a < b;
    assign eq = a == b;
    assign ge = a >= b;
endmodule
""",
    # sequential kernels
    """module counter (
    input wire clk,
    input wire rst,
    output reg [7:0] count
);
    always @(posedge clk) begin
        if (rst) begin
            count <= 8'd0;
        end else begin
            count <= count + 8'd1;
        end
    end
endmodule
""",
    """module gray_counter (
    input wire clk,
    input wire rst,
    output reg [3:0] gray
);
    reg [3:0] bin;
    always @(posedge clk) begin
        if (rst) begin
            bin <= 4'd0;
        end else begin
            bin <= bin + 4'd1;
        end
        gray <= bin ^ (bin >> 1);
    end
endmodule
""",
    """module shift_reg (
    input wire clk,
    input wire din,
    output wire dout
);
    reg [7:0] taps;
    always @(posedge clk) begin
        taps <= {taps[6:0], din};
    end
    assign dout = taps[7];
endmodule
""",
    """module negedge_latch (
    input wire clk,
    input wire [3:0] d,
    output reg [3:0] q
);
    always @(negedge clk) begin
        q <= d;
    end
endmodule
""",
    """module dual_edge_pair (
    input wire clk,
    input wire rst,
    input wire d,
    output reg q
);
    always @(posedge clk or posedge rst) begin
        if (rst) begin
            q <= 1'b0;
        end else begin
            q <= d;
        end
    end
endmodule
""",
    # parameters, hierarchy, non-ANSI ports
    """module widthp #(parameter WIDTH = 8) (
    input wire [WIDTH-1:0] a,
    output wire [WIDTH-1:0] y
);
    assign y = ~a;
endmodule
""",
    """module constants (
    output wire [7:0] y
);
    localparam MASK = 8'h5a;
    assign y = MASK;
endmodule
""",
    """module wrapper (
    input wire a,
    output wire y
);
    wire mid;
    inv_cell u0 (.a(a), .y(mid));
    inv_cell u1 (.a(mid), .y(y));
endmodule
""",
    """module positional_wrap (
    input wire a,
    output wire y
);
    inv_cell u0 (a, y);
endmodule
""",
    """module legacy_ports (a, b, y);
    input a;
    input b;
    output y;
    assign y = a & b;
endmodule
""",
    """module signed_math (
    input wire signed [7:0] a,
    input wire signed [7:0] b,
    output wire signed [7:0] y
);
    assign y = a + b;
endmodule
""",
    """module tri_pad (
    inout wire [3:0] pad,
    input wire oe,
    input wire [3:0] drive
);
    assign pad = oe ? drive : 4'bzzzz;
endmodule
""",
]


def test_corpus_is_large_enough():
    assert len(ROUND_TRIP_MODULES) >= 20


@pytest.mark.parametrize("source", ROUND_TRIP_MODULES,
                         ids=lambda s: s.split()[1])
def test_parse_print_parse_round_trip(source):
    first = parse_source(source)
    printed = print_ast(first.ast)
    second = parse_source(printed)
    assert second.ast == first.ast
    # canonical form is a fixed point
    assert print_ast(second.ast) == printed


def test_round_trip_corpus_under_ten_seconds():
    start = time.monotonic()
    for source in ROUND_TRIP_MODULES:
        ast = parse_source(source).ast
        assert parse_source(print_ast(ast)).ast == ast
    assert time.monotonic() - start < 10.0


# ---------------------------------------------------------------------------
# the three diagnostic classes fed back to the repair loop

UNDECLARED = """module m (
    input wire [7:0] din,
    output wire [7:0] dout
);
    assign dout = din ^ ht_mask;
endmodule
"""

WIDTH_MISMATCH = """module m (
    input wire [7:0] wide,
    output wire [3:0] narrow
);
    assign narrow = wide;
endmodule
"""

UNBALANCED = """module m (
    input wire clk,
    output reg q
);
    always @(posedge clk) begin
        q <= 1'b1;
endmodule
"""


@pytest.mark.parametrize("source,code", [
    (UNDECLARED, "E_UNDECLARED"),
    (WIDTH_MISMATCH, "E_WIDTH_MISMATCH"),
    (UNBALANCED, "E_UNBALANCED"),
])
def test_diagnostic_classes(source, code):
    report = syntax_check(source)
    assert not report.ok
    assert code in {d.code for d in report.diagnostics}


def test_summary_digest_format():
    ok = syntax_check(ROUND_TRIP_MODULES[0])
    assert ok.ok
    assert ok.summary == "OK 0 errors"
    bad = syntax_check(UNBALANCED)
    assert bad.summary.startswith("FAIL ")
    assert "errors" in bad.summary
    # rendered diagnostics ride along in the digest for the repair prompt
    assert "E_UNBALANCED" in bad.summary


def test_multiple_errors_reported_in_one_pass():
    source = """module m (
    input wire [7:0] a,
    output wire [7:0] x,
    output wire [7:0] y
);
    assign x = ghost1;
    assign y = ghost2;
endmodule
"""
    report = syntax_check(source)
    undeclared = [d for d in report.diagnostics if d.code == "E_UNDECLARED"]
    assert len(undeclared) == 2


def test_nonsynth_constructs_rejected():
    source = """module m (
    output reg y
);
    initial begin
        y = 1'b0;
    end
endmodule
"""
    report = syntax_check(source)
    assert not report.ok
    assert "E_NONSYNTH" in {d.code for d in report.diagnostics}


def test_diagnostic_render_shape():
    report = syntax_check(UNDECLARED)
    line = next(d for d in report.diagnostics
                if d.code == "E_UNDECLARED").render()
    # "{SEVERITY} {code} {line}:{col} {message}"
    parts = line.split(" ", 3)
    assert parts[0] == "ERROR"
    assert parts[1] == "E_UNDECLARED"
    row, _, col = parts[2].partition(":")
    assert row.isdigit() and col.isdigit()


def test_parse_for_top_and_port_signature():
    mod = parse_for_top(UART_TX)
    sig = port_signature(mod)
    names = [name for name, _, _ in sig]
    assert names == ["clk", "rst", "start", "data", "tx", "busy"]
    data = next(entry for entry in sig if entry[0] == "data")
    assert data[1] == "input" and data[2] == (7, 0)


def test_interface_gate_catches_port_changes():
    expected = port_signature(parse_for_top(UART_RX))
    renamed = UART_RX.replace("output reg valid", "output reg ready")
    renamed = renamed.replace("valid <=", "ready <=")
    diags = interface_diagnostics(expected,
                                  parse_for_top(renamed))
    assert diags
    assert all(d.code == "E_INTERFACE" for d in diags)
    # unchanged interface passes even when the body differs
    body_only = UART_RX.replace("count + 4'd1", "count + 4'd2")
    assert interface_diagnostics(expected,
                                 parse_for_top(body_only)) == []
