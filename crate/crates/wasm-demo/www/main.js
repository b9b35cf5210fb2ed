import init, { scan, expert_drive, Regressor } from "./pkg/dagger_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function bindOutputs(ids, redraw) {
  for (const id of ids) {
    const show = () => { $(id + "-v").textContent = $(id).value; };
    show();
    $(id).addEventListener("input", () => { show(); redraw(); });
  }
}

// Room panel.
const room = $("room").getContext("2d");
const SCALE = 4, PAD = 10, TOP = 50;
const rx = (x) => PAD + x * SCALE;
const ry = (y) => TOP + (100 - y) * SCALE;
let car = { x: 40, y: 30 };

function drawRoom() {
  let s, d;
  try {
    s = JSON.parse(scan(car.x, car.y, num("theta"), num("s1"), num("s2"), BigInt($("seed").value || 0)));
    d = JSON.parse(expert_drive(car.x, car.y, num("theta"), $("open-loop").checked));
  } catch (e) {
    $("drive-status").textContent = String(e);
    return;
  }
  const c = room;
  c.clearRect(0, 0, c.canvas.width, c.canvas.height);

  c.strokeStyle = "rgba(200,120,0,0.35)";
  c.lineWidth = 1;
  for (const r of s.rays) {
    c.beginPath();
    c.moveTo(rx(car.x), ry(car.y));
    c.lineTo(rx(car.x + r.noisy * Math.cos(r.angle)), ry(car.y + r.noisy * Math.sin(r.angle)));
    c.stroke();
  }

  c.strokeStyle = "#222";
  c.lineWidth = 3;
  for (const [ax, ay, bx, by] of s.walls) {
    c.beginPath();
    c.moveTo(rx(ax), ry(ay));
    c.lineTo(rx(bx), ry(by));
    c.stroke();
  }

  const path = (pts, style, dash) => {
    c.strokeStyle = style;
    c.lineWidth = 2;
    c.setLineDash(dash);
    c.beginPath();
    pts.forEach(([x, y], i) => (i ? c.lineTo(rx(x), ry(y)) : c.moveTo(rx(x), ry(y))));
    c.stroke();
    c.setLineDash([]);
  };
  path(d.plan, "#1f77b4", [6, 4]);
  path(d.poses, "#d62728", []);

  c.fillStyle = "#000";
  c.beginPath();
  c.arc(rx(car.x), ry(car.y), 4, 0, 2 * Math.PI);
  c.fill();
  $("drive-status").textContent = `expert ${d.outcome} after ${d.steps} steps`;
}

$("room").addEventListener("click", (ev) => {
  const b = ev.target.getBoundingClientRect();
  const x = (ev.clientX - b.left - PAD) / SCALE;
  const y = 100 - (ev.clientY - b.top - TOP) / SCALE;
  if (x > 0 && x < 100 && y > 0 && y < 100) {
    car = { x, y };
    drawRoom();
  }
});
$("seed").addEventListener("input", drawRoom);
$("open-loop").addEventListener("change", drawRoom);

// Dropout panel.
const band = $("band").getContext("2d");
const W = 560, H = 320;
const bx = (x) => ((x + 4) / 8) * W;
const by = (y) => H / 2 - y * (H / 5);
let model = null;
let query = -2.0;

function retrain() {
  model = new Regressor(num("dropout"), 7n);
  drawBand();
}

function drawBand() {
  const b = JSON.parse(model.band(Math.round(num("n"))));
  const c = band;
  c.clearRect(0, 0, W, H);

  c.fillStyle = "rgba(31,119,180,0.2)";
  c.beginPath();
  b.xs.forEach((x, i) => (i ? c.lineTo(bx(x), by(b.hi[i])) : c.moveTo(bx(x), by(b.hi[i]))));
  for (let i = b.xs.length - 1; i >= 0; i--) c.lineTo(bx(b.xs[i]), by(b.lo[i]));
  c.fill();

  const line = (ys, style) => {
    c.strokeStyle = style;
    c.lineWidth = 2;
    c.beginPath();
    b.xs.forEach((x, i) => (i ? c.lineTo(bx(x), by(ys[i])) : c.moveTo(bx(x), by(ys[i]))));
    c.stroke();
  };
  line(b.truth, "#999");
  line(b.mean, "#1f77b4");

  c.fillStyle = "#222";
  for (const [x, y] of b.data) c.fillRect(bx(x) - 1.5, by(y) - 1.5, 3, 3);

  const v = JSON.parse(model.decide(query, num("tau"), num("p"), Math.round(num("n"))));
  c.strokeStyle = "rgba(214,39,40,0.6)";
  c.beginPath();
  c.moveTo(bx(query), 0);
  c.lineTo(bx(query), H);
  c.stroke();
  c.fillStyle = "rgba(44,160,44,0.25)";
  c.fillRect(bx(query) - 6, by(v.expert + num("tau")), 12, by(v.expert - num("tau")) - by(v.expert + num("tau")));
  c.fillStyle = "#d62728";
  for (const s of v.samples) c.fillRect(bx(query) - 2, by(s) - 1, 4, 2);

  $("qx").textContent = query.toFixed(2);
  $("phat").textContent = v.p_hat.toFixed(2);
  $("verdict").textContent = v.actor === "novice" ? "novice acts" : "expert takes over";
}

$("band").addEventListener("click", (ev) => {
  const r = ev.target.getBoundingClientRect();
  query = ((ev.clientX - r.left) / W) * 8 - 4;
  drawBand();
});

await init();
bindOutputs(["theta", "s1", "s2"], drawRoom);
bindOutputs(["tau", "p", "n"], drawBand);
bindOutputs(["dropout"], () => {});
$("dropout").addEventListener("change", retrain);
drawRoom();
retrain();
