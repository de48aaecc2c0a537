import init, { mesh, isometry_residual, closed_form_gap } from "./pkg/qdlab_wasm.js";

const $ = (id) => document.getElementById(id);
const numbers = (id) => new Float64Array($(id).value.split(",").map(Number));

let points = [];
let yaw = 0.6;
let pitch = 0.4;

function draw() {
  const canvas = $("view");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (points.length === 0) return;
  const [cy, sy, cp, sp] = [Math.cos(yaw), Math.sin(yaw), Math.cos(pitch), Math.sin(pitch)];
  const proj = points.map(([x, y, z]) => {
    const x1 = cy * x - sy * y;
    const y1 = sy * x + cy * y;
    return [x1, cp * z - sp * y1, sp * z + cp * y1];
  });
  const r = Math.max(...proj.map(([x, y]) => Math.max(Math.abs(x), Math.abs(y))));
  const s = 0.45 * Math.min(canvas.width, canvas.height) / r;
  proj.sort((p, q) => p[2] - q[2]);
  const dmin = proj[0][2];
  const dmax = proj[proj.length - 1][2];
  for (const [x, y, d] of proj) {
    const t = dmax > dmin ? (d - dmin) / (dmax - dmin) : 0.5;
    ctx.fillStyle = `hsl(210, 60%, ${25 + 45 * t}%)`;
    ctx.fillRect(canvas.width / 2 + s * x - 2, canvas.height / 2 - s * y - 2, 4, 4);
  }
}

function loadMesh() {
  try {
    const csv = mesh(numbers("mesh-a"), Number($("mesh-z").value), 0.15, 1.4, Number($("mesh-steps").value));
    points = csv.trim().split("\n").slice(1).map((line) => line.split(",").slice(2).map(Number));
  } catch (e) {
    points = [];
    alert(e.message ?? e);
  }
  draw();
}

function show(id, f) {
  try {
    $(id).textContent = f().toExponential(3);
  } catch (e) {
    $(id).textContent = `error: ${e.message ?? e}`;
  }
}

await init();

$("mesh-go").onclick = loadMesh;
$("iso-go").onclick = () => show("iso-out", () => isometry_residual(numbers("iso-a"), numbers("iso-z"), numbers("iso-u")));
$("cf-go").onclick = () => show("cf-out", () => closed_form_gap(numbers("cf-a"), numbers("cf-u")));

let drag = null;
$("view").onpointerdown = (e) => { drag = [e.clientX, e.clientY]; };
window.onpointerup = () => { drag = null; };
window.onpointermove = (e) => {
  if (!drag) return;
  yaw += (e.clientX - drag[0]) * 0.01;
  pitch += (e.clientY - drag[1]) * 0.01;
  drag = [e.clientX, e.clientY];
  draw();
};

loadMesh();
